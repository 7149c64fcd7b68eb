//! Rounding a fractional defense profile into a mixed strategy without
//! resource sharing.
//!
//! Given a target status `f0` with `sum_u f0_u * theta_u <= R - theta_max`,
//! [`round_to_mixed`] builds a mixed strategy of at most `n^2` pure
//! strategies, each defending its nodes with exactly `theta_u`, whose
//! defending status equals `f0`. Applied to the optimal fractional strategy
//! at budget `R - theta_max`, this gives a mixed strategy whose defending
//! result is `OPT_f(R - theta_max)` ([`upper_bound_mixed`]).
//!
//! The construction repeatedly looks at the residual `f = f0 - x(D, p)`:
//!
//! * Phase A: if the top-valued nodes all fit in one budget-feasible set
//!   ([`max_top`]), play that set until its top value meets the runner-up or
//!   one of its nodes hits zero.
//! * Phase B: otherwise slice the top class down to the runner-up using a
//!   family of sets ([`find_t`]) that covers every node of the class the
//!   same number of times.
//!
//! Each round grows `|V_max(f)| + |V_0(f)|`, so there are at most `n` rounds.

use crate::error::{Error, Result};
use crate::fractional::optimal_fractional;
use crate::lp::fits;
use crate::model::{mixed_loss, Instance, MixedStrategy, NodeSet, PureStrategy, EPS_FEAS};

/// Residual entries at or below this are treated as zero.
pub const EPS_ROUND: f64 = 1e-6;

/// Relative tolerance for membership in the top class of a residual.
const CLASS_TOL: f64 = 1e-9;

/// Remaining defense-probability demand per node, entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualVector(pub Vec<f64>);

impl ResidualVector {
    pub fn new(inst: &Instance, f: Vec<f64>) -> Result<Self> {
        if f.len() != inst.n() {
            return Err(Error::Dimension { expected: inst.n(), got: f.len() });
        }
        if let Some((u, v)) =
            f.iter().enumerate().find(|(_, v)| !(v.is_finite() && (-EPS_FEAS..=1.0 + EPS_FEAS).contains(*v)))
        {
            return Err(Error::contract(format!("residual entry {u} = {v} outside [0, 1]")));
        }
        Ok(ResidualVector(f.into_iter().map(|v| v.clamp(0.0, 1.0)).collect()))
    }

    /// `sum_u f_u * theta_u`.
    pub fn weight(&self, inst: &Instance) -> f64 {
        self.0.iter().zip(inst.theta()).map(|(f, t)| f * t).sum()
    }
}

/// A vector whose entries are `0` or a common `epsilon > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceVector {
    pub t: Vec<f64>,
    pub epsilon: f64,
}

impl SliceVector {
    pub fn new(n: usize, members: &[usize], epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::contract(format!("slice height {epsilon} must be positive")));
        }
        let mut t = vec![0.0; n];
        for &u in members {
            if u >= n {
                return Err(Error::contract(format!("slice member {u} out of range")));
            }
            t[u] = epsilon;
        }
        Ok(SliceVector { t, epsilon })
    }

    /// Nodes carrying `epsilon`, by ascending index.
    pub fn members(&self) -> NodeSet {
        (0..self.t.len()).filter(|&u| self.t[u] > 0.0).collect()
    }
}

/// Output of [`find_t`]: node sets, their pure strategies, and the common
/// number of sets `c` covering each slice member.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceCover {
    pub sets: Vec<NodeSet>,
    pub strategies: Vec<PureStrategy>,
    pub c: usize,
}

/// Diagnostics from one rounding run.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundingReport {
    pub strategy: MixedStrategy,
    pub rounds: usize,
    pub entered_phase_b: bool,
    /// `|V_max(f)| + |V_0(f)|` at the start of each round.
    pub progress: Vec<usize>,
    /// Most negative residual seen before clamping; `x(D, p) <= f0` up to this.
    pub min_residual: f64,
}

fn require_isolated(inst: &Instance) -> Result<()> {
    if inst.is_isolated() {
        Ok(())
    } else {
        Err(Error::contract("rounding requires an instance without resource sharing"))
    }
}

/// Greedy prefix of positive-residual nodes by `(f desc, index asc)`,
/// stopping at the first node that would exceed the budget.
pub fn max_top(inst: &Instance, f: &ResidualVector) -> Result<NodeSet> {
    require_isolated(inst)?;
    if f.0.len() != inst.n() {
        return Err(Error::Dimension { expected: inst.n(), got: f.0.len() });
    }
    Ok(max_top_impl(inst, &f.0))
}

fn max_top_impl(inst: &Instance, f: &[f64]) -> NodeSet {
    let mut order: Vec<usize> = (0..f.len()).filter(|&u| f[u] > 0.0).collect();
    order.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(a.cmp(&b)));
    let mut total = 0.0;
    let mut set = Vec::new();
    for u in order {
        let next = total + inst.theta()[u];
        if !fits(next, inst.resource()) {
            break;
        }
        total = next;
        set.push(u);
    }
    set.sort_unstable();
    set
}

fn check_slice(inst: &Instance, t: &SliceVector) -> Result<NodeSet> {
    require_isolated(inst)?;
    if t.t.len() != inst.n() {
        return Err(Error::Dimension { expected: inst.n(), got: t.t.len() });
    }
    let members = t.members();
    let total: f64 = members.iter().map(|&u| inst.theta()[u]).sum();
    if fits(total, inst.resource()) {
        return Err(Error::contract(format!(
            "slice members need {total}, which fits the budget {}; the cyclic cover would not terminate",
            inst.resource()
        )));
    }
    Ok(members)
}

/// Starting from position `start` of the slice members (ascending index,
/// 0-based), add members cyclically while the set's threshold sum is at most
/// `R - theta_max`. Returns the set and the position after the last member
/// added; the set's sum lies in `(R - theta_max, R]`.
pub fn cycle_max_top(inst: &Instance, t: &SliceVector, start: usize) -> Result<(NodeSet, usize)> {
    let members = check_slice(inst, t)?;
    if start >= members.len() {
        return Err(Error::contract(format!("start position {start} >= {}", members.len())));
    }
    let (set, next) = cycle_impl(inst, &members, start);
    let mut set = set;
    set.sort_unstable();
    Ok((set, next))
}

fn cycle_impl(inst: &Instance, members: &[usize], mut i: usize) -> (NodeSet, usize) {
    let cap = inst.resource() - inst.theta_max();
    let mut set = Vec::new();
    let mut total = 0.0;
    while fits(total, cap) {
        let u = members[i];
        set.push(u);
        total += inst.theta()[u];
        i = (i + 1) % members.len();
    }
    (set, i)
}

/// Sets of slice members, each using more than `R - theta_max` and at most
/// `R`, that cover every member the same number of times `c`, with at most
/// `k` sets for `k` members. Successive sets come from [`cycle_max_top`]
/// chained on its returned position; once a start position repeats, the
/// sets generated since its first use form the cover.
pub fn find_t(inst: &Instance, t: &SliceVector) -> Result<SliceCover> {
    let members = check_slice(inst, t)?;
    let k = members.len();
    let mut first_use: Vec<Option<usize>> = vec![None; k];
    let mut sets: Vec<NodeSet> = Vec::with_capacity(k);
    let mut i = 0usize;
    let from = loop {
        if let Some(j) = first_use[i] {
            break j;
        }
        first_use[i] = Some(sets.len());
        let (mut set, next) = cycle_impl(inst, &members, i);
        set.sort_unstable();
        sets.push(set);
        i = next;
    };
    let sets: Vec<NodeSet> = sets.split_off(from);

    let mut count = vec![0usize; inst.n()];
    for set in &sets {
        for &u in set {
            count[u] += 1;
        }
    }
    let c = count[members[0]];
    if c == 0 || members.iter().any(|&u| count[u] != c) {
        return Err(Error::Internal("cyclic cover is not uniform".into()));
    }
    let strategies = sets.iter().map(|s| PureStrategy::covering(inst, s)).collect();
    Ok(SliceCover { sets, strategies, c })
}

/// Mixed strategy with defending status `f0` (within [`EPS_ROUND`]), at
/// most `n^2` support entries and total probability at most 1.
///
/// Requires no resource sharing and `sum_u f0_u * theta_u <= R - theta_max`.
pub fn round_to_mixed(inst: &Instance, f0: &ResidualVector) -> Result<MixedStrategy> {
    require_isolated(inst)?;
    let weight = f0.weight(inst);
    let cap = inst.resource() - inst.theta_max();
    if !fits(weight, cap) {
        return Err(Error::contract(format!("residual weight {weight} exceeds R - theta_max = {cap}")));
    }
    Ok(round_residual(inst, f0)?.strategy)
}

/// The rounding loop of [`round_to_mixed`] without the budget precondition.
/// The returned strategy still has status `f0`; its total probability is
/// only guaranteed to be at most 1 when the precondition holds (or when all
/// thresholds are equal and divide the budget).
pub fn round_residual(inst: &Instance, f0: &ResidualVector) -> Result<RoundingReport> {
    require_isolated(inst)?;
    let n = inst.n();
    if f0.0.len() != n {
        return Err(Error::Dimension { expected: n, got: f0.0.len() });
    }
    let theta = inst.theta();
    let mut f: Vec<f64> = f0.0.iter().map(|&v| if v <= EPS_ROUND { 0.0 } else { v.min(1.0) }).collect();
    let mut support = Vec::new();
    let mut probs = Vec::new();
    let mut report = RoundingReport {
        strategy: MixedStrategy::default(),
        rounds: 0,
        entered_phase_b: false,
        progress: Vec::new(),
        min_residual: 0.0,
    };

    loop {
        let fmax = f.iter().copied().fold(0.0, f64::max);
        if fmax <= 0.0 {
            break;
        }
        report.rounds += 1;
        if report.rounds > n {
            return Err(Error::Internal(format!("rounding did not finish within {n} rounds")));
        }

        let tol = CLASS_TOL * fmax;
        let mut top = Vec::new();
        for (u, fu) in f.iter_mut().enumerate() {
            if *fu >= fmax - tol {
                *fu = fmax;
                top.push(u);
            }
        }
        report.progress.push(top.len() + f.iter().filter(|&&v| v == 0.0).count());

        let set = max_top_impl(inst, &f);
        let mut in_set = vec![false; n];
        set.iter().for_each(|&u| in_set[u] = true);

        if top.iter().all(|&u| in_set[u]) {
            let outside = (0..n).filter(|&u| !in_set[u]).map(|u| f[u]).fold(0.0, f64::max);
            let inside_min = set.iter().map(|&u| f[u]).fold(f64::INFINITY, f64::min);
            let p = (fmax - outside).min(inside_min);
            for &u in &set {
                f[u] -= p;
            }
            support.push(PureStrategy::covering(inst, &set));
            probs.push(p);
        } else {
            report.entered_phase_b = true;
            let mut in_top = vec![false; n];
            top.iter().for_each(|&u| in_top[u] = true);
            let runner_up = (0..n).filter(|&u| !in_top[u]).map(|u| f[u]).fold(0.0, f64::max);
            let epsilon = fmax - runner_up;
            let cover = find_t(inst, &SliceVector::new(n, &top, epsilon)?)?;
            let q = epsilon / cover.c as f64;
            for (s, r) in cover.sets.iter().zip(cover.strategies) {
                for &u in s {
                    f[u] -= q;
                }
                support.push(r);
                probs.push(q);
            }
        }

        for v in f.iter_mut() {
            report.min_residual = report.min_residual.min(*v);
            *v = if *v <= EPS_ROUND { 0.0 } else { v.min(1.0) };
        }
    }

    debug_assert!(support.iter().all(|r| r.0.iter().zip(theta).all(|(a, t)| *a == 0.0 || a == t)));
    report.strategy = MixedStrategy { support, probs };
    Ok(report)
}

/// When every threshold equals `theta` and the budget is (numerically) a
/// multiple of it, that multiple.
fn uniform_multiple(inst: &Instance) -> Option<f64> {
    let t0 = inst.theta()[0];
    if inst.theta().iter().any(|&t| (t - t0).abs() > 1e-12 * t0) {
        return None;
    }
    let k = (inst.resource() / t0).round();
    ((inst.resource() / t0 - k).abs() <= 1e-9 * k.max(1.0)).then_some(k * t0)
}

/// Mixed strategy achieving `OPT_f(R - theta_max)` without resource sharing:
/// solve the fractional LP at `R - theta_max`, take `f0_u = min(r_u / theta_u, 1)`
/// and round it. With equal thresholds dividing `R` the LP is solved at `R`
/// itself and the result matches `OPT_f(R)`.
///
/// Returns the strategy and its defending result.
pub fn upper_bound_mixed(inst: &Instance) -> Result<(MixedStrategy, f64)> {
    require_isolated(inst)?;
    let theta_max = inst.theta_max();
    if !fits(theta_max, inst.resource()) {
        return Err(Error::contract(format!("budget {} is below theta_max = {theta_max}", inst.resource())));
    }
    let budget = uniform_multiple(inst).unwrap_or((inst.resource() - theta_max).max(0.0));
    let (r, _) = optimal_fractional(inst, budget)?;
    let f0: Vec<f64> = r.0.iter().zip(inst.theta()).map(|(&ru, &t)| (ru / t).clamp(0.0, 1.0)).collect();
    let report = round_residual(inst, &ResidualVector(f0))?;
    let total = report.strategy.total_prob();
    if total > 1.0 + EPS_FEAS {
        return Err(Error::Internal(format!("rounded probabilities sum to {total}")));
    }
    let (_, loss) = mixed_loss(inst, &report.strategy)?;
    Ok((report.strategy, loss))
}
