//! Optimal pure strategy by binary search on the target loss.

use crate::error::{Error, Result};
use crate::lp::can_defend;
use crate::model::{pure_loss, Instance, PureStrategy};

/// Nodes whose value exceeds `target`, i.e. the ones that must be defended
/// for the defending result to be at most `target`.
pub fn nodes_above(inst: &Instance, target: f64) -> Vec<usize> {
    (0..inst.n()).filter(|&u| inst.alpha()[u] > target).collect()
}

/// The optimal pure strategy and its defending result `OPT_p`.
///
/// The defending result of a pure strategy is always `0` or some `alpha_u`,
/// and defending everything above a target gets harder as the target drops,
/// so a binary search over the distinct candidates finds the smallest
/// achievable one. The witness is whatever the feasibility check returns.
pub fn optimal_pure(inst: &Instance) -> Result<(PureStrategy, f64)> {
    let mut candidates: Vec<f64> = inst.alpha().to_vec();
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // The largest candidate leaves nothing to defend.
    let mut hi = candidates.len() - 1;
    let mut best = can_defend(inst, &[], inst.resource())?
        .ok_or_else(|| Error::Internal("empty set reported undefendable".into()))?;
    let mut lo = 0usize;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match can_defend(inst, &nodes_above(inst, candidates[mid]), inst.resource())? {
            Some(r) => {
                best = r;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    let (_, result) = pure_loss(inst, &best)?;
    Ok((best, result))
}
