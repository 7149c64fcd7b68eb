//! Seeded instance generation on a given graph.

use crate::dataset::EdgeList;
use crate::error::{Error, Result};
use crate::model::{Edge, Instance};
use crate::rng::SplitMix64;

/// Random instance parameters.
///
/// Values are integers drawn uniformly from `alpha_range` (inclusive),
/// thresholds reals from `theta_range` unless `uniform_theta` is set, edge
/// weights reals from `weight_range`, and the budget is
/// `resource_fraction * sum(theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub alpha_range: (i64, i64),
    pub theta_range: (f64, f64),
    pub weight_range: (f64, f64),
    pub resource_fraction: f64,
    pub isolated: bool,
    pub uniform_theta: Option<f64>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            alpha_range: (1, 9),
            theta_range: (1.0, 10.0),
            weight_range: (0.0, 1.0),
            resource_fraction: 0.2,
            isolated: false,
            uniform_theta: None,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let (alo, ahi) = self.alpha_range;
        if alo > ahi || alo < 0 {
            return Err(Error::contract(format!("bad value range [{alo}, {ahi}]")));
        }
        let (tlo, thi) = self.theta_range;
        if !(tlo > 0.0 && tlo <= thi && thi.is_finite()) {
            return Err(Error::contract(format!("bad threshold range [{tlo}, {thi}]")));
        }
        let (wlo, whi) = self.weight_range;
        if !(0.0 <= wlo && wlo <= whi && whi <= 1.0) {
            return Err(Error::contract(format!("bad weight range [{wlo}, {whi}]")));
        }
        if !(self.resource_fraction > 0.0 && self.resource_fraction.is_finite()) {
            return Err(Error::contract(format!("resource fraction {} must be positive", self.resource_fraction)));
        }
        if let Some(t) = self.uniform_theta {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::contract(format!("uniform threshold {t} must be positive")));
            }
        }
        Ok(())
    }
}

/// Draws in a fixed order from one SplitMix64 stream seeded with `cfg.seed`:
/// a value per node in index order, then a threshold per node (skipped with
/// `uniform_theta`), then a weight per edge in list order (skipped when
/// `isolated`, which also drops the edges).
pub fn generate_instance(graph: &EdgeList, cfg: &GenConfig) -> Result<Instance> {
    cfg.validate()?;
    let n = graph.n;
    let mut rng = SplitMix64::new(cfg.seed);
    let alpha: Vec<f64> = (0..n).map(|_| rng.int_in(cfg.alpha_range.0, cfg.alpha_range.1) as f64).collect();
    let theta: Vec<f64> = match cfg.uniform_theta {
        Some(t) => vec![t; n],
        None => (0..n).map(|_| rng.uniform(cfg.theta_range.0, cfg.theta_range.1)).collect(),
    };
    let edges = if cfg.isolated {
        Vec::new()
    } else {
        graph
            .edges
            .iter()
            .map(|&(u, v)| Edge { u, v, w: rng.uniform(cfg.weight_range.0, cfg.weight_range.1) })
            .collect()
    };
    let resource = cfg.resource_fraction * theta.iter().sum::<f64>();
    Instance::new(theta, alpha, edges, resource)
}
