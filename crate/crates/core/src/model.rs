//! Game instances, strategies, and the loss semantics that every solver in
//! this crate is measured against.
//!
//! A defender spreads a budget `R` over the nodes of a weighted undirected
//! graph. Node `u` is well defended when its defending power
//! `r_u + sum_{v in N(u)} w_uv * r_v` reaches its threshold `theta_u`; an
//! attacker then hits the node with the largest expected loss.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack on `power >= theta` so LP allocations that are tight up to
/// solver precision count as defending the node.
pub const EPS_STATUS: f64 = 1e-9;

/// Slack on budget and probability-sum invariants.
pub const EPS_FEAS: f64 = 1e-7;

/// Node set, as ascending dense indices.
pub type NodeSet = Vec<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// An immutable game instance. Node identity is the dense index `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    theta: Vec<f64>,
    alpha: Vec<f64>,
    edges: Vec<Edge>,
    resource: f64,
    adjacency: Vec<Vec<(usize, f64)>>,
    isolated: bool,
}

impl Instance {
    pub fn new(theta: Vec<f64>, alpha: Vec<f64>, edges: Vec<Edge>, resource: f64) -> Result<Self> {
        let n = theta.len();
        if n == 0 {
            return Err(Error::InvalidInstance("instance has no nodes".into()));
        }
        if alpha.len() != n {
            return Err(Error::Dimension { expected: n, got: alpha.len() });
        }
        for (u, &t) in theta.iter().enumerate() {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidInstance(format!("theta[{u}] = {t} must be positive and finite")));
            }
        }
        for (u, &a) in alpha.iter().enumerate() {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::InvalidInstance(format!("alpha[{u}] = {a} must be nonnegative and finite")));
            }
        }
        if !(resource.is_finite() && resource >= 0.0) {
            return Err(Error::InvalidInstance(format!("resource {resource} must be nonnegative and finite")));
        }

        let mut seen = HashSet::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidInstance(format!("edge ({}, {}) references a node >= {n}", e.u, e.v)));
            }
            if e.u == e.v {
                return Err(Error::InvalidInstance(format!("self-loop on node {}", e.u)));
            }
            if !(e.w.is_finite() && (0.0..=1.0).contains(&e.w)) {
                return Err(Error::InvalidInstance(format!("edge ({}, {}) weight {} outside [0, 1]", e.u, e.v, e.w)));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::InvalidInstance(format!("duplicate edge {{{}, {}}}", e.u, e.v)));
            }
            if e.w > 0.0 {
                adjacency[e.u].push((e.v, e.w));
                adjacency[e.v].push((e.u, e.w));
            }
        }
        let isolated = adjacency.iter().all(Vec::is_empty);

        Ok(Instance { theta, alpha, edges, resource, adjacency, isolated })
    }

    /// Instance without resource sharing.
    pub fn isolated(theta: Vec<f64>, alpha: Vec<f64>, resource: f64) -> Result<Self> {
        Self::new(theta, alpha, Vec::new(), resource)
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn resource(&self) -> f64 {
        self.resource
    }

    /// Neighbors of `u` with a positive sharing weight.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adjacency[u]
    }

    /// True when no edge carries a positive weight.
    pub fn is_isolated(&self) -> bool {
        self.isolated
    }

    pub fn theta_max(&self) -> f64 {
        self.theta.iter().copied().fold(0.0, f64::max)
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha.iter().copied().fold(0.0, f64::max)
    }

    pub fn theta_sum(&self) -> f64 {
        self.theta.iter().sum()
    }

    /// Same graph and requirements with a different budget.
    pub fn with_resource(&self, resource: f64) -> Result<Self> {
        if !(resource.is_finite() && resource >= 0.0) {
            return Err(Error::InvalidInstance(format!("resource {resource} must be nonnegative and finite")));
        }
        Ok(Instance { resource, ..self.clone() })
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            nodes: self.theta.iter().zip(&self.alpha).map(|(&theta, &alpha)| NodeSpec { theta, alpha }).collect(),
            edges: self.edges.clone(),
            resource: self.resource,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.try_into()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::Dimension { expected: self.n(), got: len });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub theta: f64,
    pub alpha: f64,
}

/// On-disk instance layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub edges: Vec<Edge>,
    pub resource: f64,
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let (theta, alpha) = file.nodes.iter().map(|s| (s.theta, s.alpha)).unzip();
        Instance::new(theta, alpha, file.edges, file.resource)
    }
}

/// A deterministic allocation `r`, one entry per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PureStrategy(pub Vec<f64>);

impl PureStrategy {
    pub fn zeros(n: usize) -> Self {
        PureStrategy(vec![0.0; n])
    }

    /// Allocation of exactly `theta_u` on each node of `set`.
    pub fn covering(inst: &Instance, set: &[usize]) -> Self {
        let mut r = vec![0.0; inst.n()];
        for &u in set {
            r[u] = inst.theta[u];
        }
        PureStrategy(r)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total resource used.
    pub fn norm(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        inst.check_len(self.len())?;
        if let Some((u, r)) = self.0.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::InvalidStrategy(format!("r[{u}] = {r} must be nonnegative and finite")));
        }
        let norm = self.norm();
        if norm > inst.resource + EPS_FEAS * (1.0 + inst.resource) {
            return Err(Error::InvalidStrategy(format!("uses {norm} resource, budget is {}", inst.resource)));
        }
        Ok(())
    }
}

/// A finite multiset of pure strategies with probabilities. Missing mass
/// (`sum(probs) < 1`) is an implicit all-zero strategy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MixedStrategy {
    pub support: Vec<PureStrategy>,
    pub probs: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(support: Vec<PureStrategy>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::Dimension { expected: support.len(), got: probs.len() });
        }
        Ok(MixedStrategy { support, probs })
    }

    pub fn pure(r: PureStrategy) -> Self {
        MixedStrategy { support: vec![r], probs: vec![1.0] }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total_prob(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.support.len() != self.probs.len() {
            return Err(Error::Dimension { expected: self.support.len(), got: self.probs.len() });
        }
        for (i, &p) in self.probs.iter().enumerate() {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidStrategy(format!("probability {i} = {p} outside [0, 1]")));
            }
        }
        let total = self.total_prob();
        if total > 1.0 + EPS_FEAS {
            return Err(Error::InvalidStrategy(format!("probabilities sum to {total}")));
        }
        self.support.iter().try_for_each(|r| r.validate(inst))
    }

    pub fn to_file(&self) -> StrategyFile {
        StrategyFile { support: self.support.iter().map(|r| r.0.clone()).collect(), probs: self.probs.clone() }
    }
}

/// On-disk mixed strategy layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub support: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
}

impl From<StrategyFile> for MixedStrategy {
    fn from(file: StrategyFile) -> Self {
        MixedStrategy { support: file.support.into_iter().map(PureStrategy).collect(), probs: file.probs }
    }
}

/// Per-node expected loss when that node is attacked.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector(pub Vec<f64>);

impl LossVector {
    /// The defending result: the attacker's best response.
    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn defending_power(inst: &Instance, r: &PureStrategy) -> Result<Vec<f64>> {
    inst.check_len(r.len())?;
    Ok(power_unchecked(inst, r.as_slice()))
}

pub(crate) fn power_unchecked(inst: &Instance, r: &[f64]) -> Vec<f64> {
    (0..inst.n()).map(|u| r[u] + inst.adjacency[u].iter().map(|&(v, w)| w * r[v]).sum::<f64>()).collect()
}

pub fn defending_status(inst: &Instance, r: &PureStrategy) -> Result<Vec<bool>> {
    let power = defending_power(inst, r)?;
    Ok(power.iter().zip(&inst.theta).map(|(&p, &t)| p >= t - EPS_STATUS).collect())
}

pub fn pure_loss(inst: &Instance, r: &PureStrategy) -> Result<(LossVector, f64)> {
    let status = defending_status(inst, r)?;
    let loss = LossVector(status.iter().zip(&inst.alpha).map(|(&x, &a)| if x { 0.0 } else { a }).collect());
    let result = loss.max();
    Ok((loss, result))
}

pub fn mixed_status(inst: &Instance, m: &MixedStrategy) -> Result<Vec<f64>> {
    if m.support.len() != m.probs.len() {
        return Err(Error::Dimension { expected: m.support.len(), got: m.probs.len() });
    }
    let mut x = vec![0.0; inst.n()];
    for (r, &p) in m.support.iter().zip(&m.probs) {
        for (xu, defended) in x.iter_mut().zip(defending_status(inst, r)?) {
            if defended {
                *xu += p;
            }
        }
    }
    Ok(x)
}

/// Loss vector and defending result of a mixed strategy, given its status.
pub fn loss_from_status(inst: &Instance, status: &[f64]) -> (LossVector, f64) {
    let loss = LossVector(status.iter().zip(&inst.alpha).map(|(&x, &a)| ((1.0 - x) * a).max(0.0)).collect());
    let result = loss.max();
    (loss, result)
}

pub fn mixed_loss(inst: &Instance, m: &MixedStrategy) -> Result<(LossVector, f64)> {
    let status = mixed_status(inst, m)?;
    Ok(loss_from_status(inst, &status))
}

/// Loss when node `u` counts as `min(power / theta, 1)` defended.
pub fn fractional_loss(inst: &Instance, r: &PureStrategy) -> Result<(LossVector, f64)> {
    let power = defending_power(inst, r)?;
    let loss = LossVector(
        power.iter().zip(&inst.theta).zip(&inst.alpha).map(|((&p, &t), &a)| (1.0 - (p / t).min(1.0)) * a).collect(),
    );
    let result = loss.max();
    Ok((loss, result))
}
