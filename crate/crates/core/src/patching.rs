//! Small-support mixed strategies for the general model by patching.
//!
//! Start from the optimal pure strategy. Each round re-optimizes the
//! probabilities over the current support, ranks nodes by their resulting
//! loss, and adds a strategy that defends the longest defendable prefix of
//! that ranking ([`shared_max_top`]). If an existing strategy already
//! defends that prefix, the ranking is replaced once by random scores
//! ([`find_r`]).

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::fmt_sig9;
use crate::lp::{build_prob_lp, can_defend, solve, LpStatus, EPS_LP};
use crate::model::{
    defending_status, loss_from_status, mixed_loss, Instance, LossVector, MixedStrategy, NodeSet, PureStrategy,
};
use crate::pure::optimal_pure;
use crate::rng::SplitMix64;

/// Patching parameters: at most `iterations` support strategies, and the
/// seed for the random fallback scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchConfig {
    pub iterations: usize,
    pub rng_seed: u64,
}

impl PatchConfig {
    pub fn new(iterations: usize, rng_seed: u64) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::contract("patching needs at least one iteration"));
        }
        Ok(PatchConfig { iterations, rng_seed })
    }
}

/// One round of a patching run.
///
/// `result` is the defending result of the support as it stood at the start
/// of round `iter` (the last round is the final re-optimization). The other
/// fields describe the strategy search made in that round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchRecord {
    pub iter: usize,
    pub support: usize,
    pub result: f64,
    /// Top loss inside the patched set minus top loss outside it.
    pub delta_l: f64,
    pub fallback: bool,
    /// The patched set contained every maximum-loss node.
    pub covers_max: bool,
    /// A strategy was added to the support this round.
    pub added: bool,
    pub ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PatchTrace {
    pub records: Vec<PatchRecord>,
}

impl PatchTrace {
    pub const CSV_HEADER: &'static str = "iter,support,result,delta_l,fallback,ms";

    pub fn results(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.result).collect()
    }

    /// CSV with [`Self::CSV_HEADER`]; wall-clock columns are written as 0
    /// unless `timing` is set, so untimed output is reproducible byte for byte.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let ms = if timing { r.ms } else { 0.0 };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.iter,
                r.support,
                fmt_sig9(r.result),
                fmt_sig9(r.delta_l),
                u8::from(r.fallback),
                fmt_sig9(ms)
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchOutcome {
    pub strategy: MixedStrategy,
    pub result: f64,
    pub trace: PatchTrace,
}

/// A solver failure during patching, with the rounds completed before it.
#[derive(Debug)]
pub struct PatchFailure {
    pub error: Error,
    pub trace: PatchTrace,
}

impl std::fmt::Display for PatchFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} rounds)", self.error, self.trace.records.len())
    }
}

impl std::error::Error for PatchFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<PatchFailure> for Error {
    fn from(f: PatchFailure) -> Self {
        f.error
    }
}

fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Longest defendable prefix of the nodes ranked by `(score desc, index asc)`,
/// with a strategy defending it. Prefix feasibility is monotone, so the
/// length is found by binary search.
fn shared_max_top_with_witness(inst: &Instance, scores: &[f64]) -> Result<(NodeSet, PureStrategy)> {
    if scores.len() != inst.n() {
        return Err(Error::Dimension { expected: inst.n(), got: scores.len() });
    }
    let order = ranking(scores);
    let budget = inst.resource();
    let mut best =
        can_defend(inst, &[], budget)?.ok_or_else(|| Error::Internal("empty set reported undefendable".into()))?;
    let (mut lo, mut hi) = (0usize, inst.n());
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        match can_defend(inst, &order[..mid], budget)? {
            Some(r) => {
                best = r;
                lo = mid;
            }
            None => hi = mid - 1,
        }
    }
    let mut set = order[..lo].to_vec();
    set.sort_unstable();
    Ok((set, best))
}

/// Longest prefix of the ranking by `(score desc, index asc)` that can be
/// defended with the full budget, by ascending index.
pub fn shared_max_top(inst: &Instance, scores: &LossVector) -> Result<NodeSet> {
    shared_max_top_with_witness(inst, &scores.0).map(|(s, _)| s)
}

/// What [`find_r`] settled on.
#[derive(Debug, Clone, PartialEq)]
pub struct FoundStrategy {
    /// The patched set that `strategy` defends (from the fallback scores if
    /// `fallback`).
    pub set: NodeSet,
    pub strategy: Option<PureStrategy>,
    pub fallback: bool,
}

/// A strategy defending the top defendable prefix of `losses`, unless some
/// member of `support` already defends all of it; then one redraw with `n`
/// uniform scores from `rng`. `strategy` is `None` if the redraw is covered
/// as well.
pub fn find_r(
    inst: &Instance,
    support: &[PureStrategy],
    losses: &LossVector,
    rng: &mut SplitMix64,
) -> Result<FoundStrategy> {
    let statuses = support.iter().map(|r| defending_status(inst, r)).collect::<Result<Vec<_>>>()?;
    find_r_with(inst, &statuses, &losses.0, rng)
}

fn find_r_with(inst: &Instance, statuses: &[Vec<bool>], losses: &[f64], rng: &mut SplitMix64) -> Result<FoundStrategy> {
    let covered = |set: &[usize]| statuses.iter().any(|x| set.iter().all(|&u| x[u]));
    let (set, r) = shared_max_top_with_witness(inst, losses)?;
    if !covered(&set) {
        return Ok(FoundStrategy { set, strategy: Some(r), fallback: false });
    }
    let scores: Vec<f64> = (0..inst.n()).map(|_| rng.next_f64()).collect();
    let (set, r) = shared_max_top_with_witness(inst, &scores)?;
    let strategy = (!covered(&set)).then_some(r);
    Ok(FoundStrategy { set, strategy, fallback: true })
}

/// Optimal probabilities over a fixed support and the resulting defending
/// result. A single strategy is played with probability 1 without an LP.
pub fn prob_lp(inst: &Instance, support: &[PureStrategy]) -> Result<(Vec<f64>, f64)> {
    let statuses = support.iter().map(|r| defending_status(inst, r)).collect::<Result<Vec<_>>>()?;
    let probs = prob_lp_with(inst, &statuses)?;
    let m = MixedStrategy { support: support.to_vec(), probs };
    let (_, result) = mixed_loss(inst, &m)?;
    Ok((m.probs, result))
}

fn prob_lp_with(inst: &Instance, statuses: &[Vec<bool>]) -> Result<Vec<f64>> {
    if statuses.len() == 1 {
        return Ok(vec![1.0]);
    }
    let k = statuses.len();
    let sol = solve(&build_prob_lp(inst, statuses)?)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.x[..k].iter().map(|p| p.clamp(0.0, 1.0)).collect()),
        other => Err(Error::Solver(format!("probability LP reported {other:?}"))),
    }
}

fn status_vector(inst: &Instance, statuses: &[Vec<bool>], probs: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; inst.n()];
    for (s, &p) in statuses.iter().zip(probs) {
        for (xu, &d) in x.iter_mut().zip(s) {
            if d {
                *xu += p;
            }
        }
    }
    x
}

/// `(covers_max, delta_l)` for patching `set` under `losses`: whether the set
/// contains every maximum-loss node, and its top loss minus the top loss
/// outside it (0 when nothing is outside).
fn patch_gap(losses: &[f64], set: &[usize]) -> (bool, f64) {
    let mut inside = vec![false; losses.len()];
    set.iter().for_each(|&u| inside[u] = true);
    let top = losses.iter().copied().fold(0.0, f64::max);
    let max_in = set.iter().map(|&u| losses[u]).fold(0.0, f64::max);
    let max_out = (0..losses.len()).filter(|&u| !inside[u]).map(|u| losses[u]).fold(0.0, f64::max);
    let covers = (0..losses.len()).all(|u| inside[u] || losses[u] < top);
    (covers && !set.is_empty(), max_in - max_out)
}

/// Run patching for `cfg.iterations` rounds. The support starts as the
/// optimal pure strategy and gains at most one strategy per round, so it
/// never exceeds `cfg.iterations` strategies.
pub fn patch(inst: &Instance, cfg: &PatchConfig) -> std::result::Result<PatchOutcome, PatchFailure> {
    let mut trace = PatchTrace::default();
    match patch_inner(inst, cfg, &mut trace) {
        Ok((strategy, result)) => Ok(PatchOutcome { strategy, result, trace }),
        Err(error) => Err(PatchFailure { error, trace }),
    }
}

fn patch_inner(inst: &Instance, cfg: &PatchConfig, trace: &mut PatchTrace) -> Result<(MixedStrategy, f64)> {
    if cfg.iterations == 0 {
        return Err(Error::contract("patching needs at least one iteration"));
    }
    let mut rng = SplitMix64::new(cfg.rng_seed);
    let (r0, _) = optimal_pure(inst)?;
    let mut support = vec![r0.clone()];
    let mut statuses = vec![defending_status(inst, &r0)?];

    for iter in 1..=cfg.iterations {
        let start = Instant::now();
        let probs = prob_lp_with(inst, &statuses)?;
        let x = status_vector(inst, &statuses, &probs);
        let (losses, _) = loss_from_status(inst, &x);
        let m = MixedStrategy { support: support.clone(), probs };
        let (_, result) = mixed_loss(inst, &m)?;

        let mut record = PatchRecord {
            iter,
            support: support.len(),
            result,
            delta_l: 0.0,
            fallback: false,
            covers_max: false,
            added: false,
            ms: 0.0,
        };
        if iter == cfg.iterations {
            record.ms = start.elapsed().as_secs_f64() * 1e3;
            trace.records.push(record);
            return Ok((m, result));
        }

        let found = find_r_with(inst, &statuses, &losses.0, &mut rng)?;
        let (covers, delta) = patch_gap(&losses.0, &found.set);
        record.fallback = found.fallback;
        record.covers_max = covers;
        record.delta_l = delta;
        if let Some(r) = found.strategy {
            let status = defending_status(inst, &r)?;
            if !statuses.contains(&status) {
                support.push(r);
                statuses.push(status);
                record.added = true;
            }
        }
        record.ms = start.elapsed().as_secs_f64() * 1e3;
        trace.records.push(record);
    }
    unreachable!("the last round returns")
}

/// Check the per-round progress guarantee of patching: when `set` contains
/// every maximum-loss node of `current` and its loss gap `delta` is
/// nonnegative, adding a strategy that defends `set` must bring the result
/// down to `(1 - delta / (delta + alpha_max)) * old` or better.
///
/// Returns `true` when the guarantee is not applicable.
pub fn progress_bound_check(inst: &Instance, current: &MixedStrategy, set: &[usize], new_result: f64) -> Result<bool> {
    let (losses, old) = mixed_loss(inst, current)?;
    if set.iter().any(|&u| u >= inst.n()) {
        return Err(Error::contract("patched set has a node out of range"));
    }
    let (covers, delta) = patch_gap(&losses.0, set);
    if !covers || delta < 0.0 {
        return Ok(true);
    }
    Ok(new_result <= progress_bound(inst.alpha_max(), old, delta) + EPS_LP)
}

/// `(1 - delta / (delta + alpha_max)) * old`.
pub fn progress_bound(alpha_max: f64, old: f64, delta: f64) -> f64 {
    if delta + alpha_max <= 0.0 {
        return old;
    }
    (1.0 - delta / (delta + alpha_max)) * old
}
