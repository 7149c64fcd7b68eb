//! Linear programs: a small problem description, a simplex solver behind
//! [`solve`], and builders for the three LP families the game needs
//! (defend-set feasibility, optimal fractional strategy, and optimal
//! probabilities over a fixed support).

mod simplex;

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{power_unchecked, Instance, PureStrategy};

/// Scaled constraint violation accepted from the solver: `|viol| <= EPS_LP * (1 + |rhs|)`.
pub const EPS_LP: f64 = 1e-8;

/// Relative slack used when comparing a threshold sum against a budget.
pub(crate) const BUDGET_TOL: f64 = 1e-9;

pub(crate) fn fits(total: f64, budget: f64) -> bool {
    total <= budget + BUDGET_TOL * (1.0 + budget.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize objective . x` subject to linear constraints and per-variable
/// bounds (default `[0, +inf)`).
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            num_vars,
            objective: Vec::new(),
            constraints: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn minimize(mut self, objective: Vec<(usize, f64)>) -> Self {
        self.objective = objective;
        self
    }

    pub fn add(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.num_vars || self.upper.len() != self.num_vars {
            return Err(Error::InvalidLp("bound vectors do not match num_vars".into()));
        }
        let check_terms = |terms: &[(usize, f64)], what: &str| -> Result<()> {
            for &(j, a) in terms {
                if j >= self.num_vars {
                    return Err(Error::InvalidLp(format!("{what} references variable {j} >= {}", self.num_vars)));
                }
                if !a.is_finite() {
                    return Err(Error::InvalidLp(format!("{what} has non-finite coefficient {a}")));
                }
            }
            Ok(())
        };
        check_terms(&self.objective, "objective")?;
        for (i, c) in self.constraints.iter().enumerate() {
            check_terms(&c.coeffs, &format!("constraint {i}"))?;
            if !c.rhs.is_finite() {
                return Err(Error::InvalidLp(format!("constraint {i} has non-finite rhs")));
            }
        }
        for j in 0..self.num_vars {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::InvalidLp(format!("variable {j} has bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// Largest violation over constraints and bounds, each scaled by `1 + |rhs|`.
    pub fn max_scaled_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol / (1.0 + c.rhs.abs()));
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max((self.lower[j] - v) / (1.0 + self.lower[j].abs()));
            if self.upper[j].is_finite() {
                worst = worst.max((v - self.upper[j]) / (1.0 + self.upper[j].abs()));
            }
        }
        worst
    }

    /// Human-readable dump in CPLEX LP format.
    pub fn to_cplex_lp(&self) -> String {
        fn terms(out: &mut String, coeffs: &[(usize, f64)]) {
            if coeffs.is_empty() {
                out.push_str(" 0 x0");
            }
            for &(j, a) in coeffs {
                let sign = if a < 0.0 { '-' } else { '+' };
                let _ = write!(out, " {sign} {} x{j}", a.abs());
            }
        }
        let mut out = String::from("Minimize\n obj:");
        terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{i}:");
            terms(&mut out, &c.coeffs);
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " {rel} {}", c.rhs);
        }
        out.push_str("Bounds\n");
        for j in 0..self.num_vars {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => {
                    let _ = writeln!(out, " {lo} <= x{j} <= {hi}");
                }
                (true, false) if lo != 0.0 => {
                    let _ = writeln!(out, " x{j} >= {lo}");
                }
                (true, false) => {}
                (false, true) => {
                    let _ = writeln!(out, " -inf <= x{j} <= {hi}");
                }
                (false, false) => {
                    let _ = writeln!(out, " x{j} free");
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `x` and `objective` are meaningful only when `status` is `Optimal`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solve `p` to optimality or report infeasible/unbounded. Numerical
/// trouble surfaces as [`Error::Solver`], never as a wrong status.
pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    simplex::solve(p)
}

/// Feasibility LP: some `r >= 0` with `sum r <= budget` reaching `theta_u`
/// on every node of `set`.
pub fn build_defend_set_lp(inst: &Instance, set: &[usize], budget: f64) -> LpProblem {
    let n = inst.n();
    let mut lp = LpProblem::new(n);
    lp.add((0..n).map(|u| (u, 1.0)).collect(), Relation::Le, budget);
    for &u in set {
        let mut row = vec![(u, 1.0)];
        row.extend(inst.neighbors(u).iter().copied());
        lp.add(row, Relation::Ge, inst.theta()[u]);
    }
    lp
}

/// A strategy defending every node of `set` within `budget`, or `None`.
///
/// Without resource sharing a set is defendable iff its thresholds fit the
/// budget, and the witness is `theta` on the set; otherwise the feasibility
/// LP decides. LP witnesses are topped up on any node that falls short of
/// its threshold by solver round-off.
pub fn can_defend(inst: &Instance, set: &[usize], budget: f64) -> Result<Option<PureStrategy>> {
    check_set(inst, set)?;
    if inst.is_isolated() {
        let need: f64 = set.iter().map(|&u| inst.theta()[u]).sum();
        return Ok(fits(need, budget).then(|| PureStrategy::covering(inst, set)));
    }
    can_defend_lp(inst, set, budget)
}

/// [`can_defend`] that always goes through the LP.
pub fn can_defend_lp(inst: &Instance, set: &[usize], budget: f64) -> Result<Option<PureStrategy>> {
    check_set(inst, set)?;
    if set.is_empty() {
        return Ok(Some(PureStrategy::zeros(inst.n())));
    }
    let sol = solve(&build_defend_set_lp(inst, set, budget))?;
    match sol.status {
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::Solver("feasibility LP reported unbounded".into())),
        LpStatus::Optimal => {
            let mut r: Vec<f64> = sol.x.iter().map(|v| v.max(0.0)).collect();
            let power = power_unchecked(inst, &r);
            for &u in set {
                let gap = inst.theta()[u] - power[u];
                if gap > 0.0 {
                    r[u] += gap;
                }
            }
            Ok(Some(PureStrategy(r)))
        }
    }
}

fn check_set(inst: &Instance, set: &[usize]) -> Result<()> {
    match set.iter().find(|&&u| u >= inst.n()) {
        Some(u) => Err(Error::contract(format!("node {u} not in instance of {} nodes", inst.n()))),
        None => Ok(()),
    }
}

/// The fractional-strategy LP over variables `(r_0..r_{n-1}, L)`:
/// minimize `L` with `sum r <= budget` and
/// `(1 - power_u / theta_u) * alpha_u <= L` for every node. `L >= 0` keeps it
/// bounded when the budget exceeds all requirements.
pub fn build_fractional_lp(inst: &Instance, budget: f64) -> LpProblem {
    let n = inst.n();
    let mut lp = LpProblem::new(n + 1).minimize(vec![(n, 1.0)]);
    lp.add((0..n).map(|u| (u, 1.0)).collect(), Relation::Le, budget);
    for u in 0..n {
        let (a, t) = (inst.alpha()[u], inst.theta()[u]);
        if a == 0.0 {
            continue;
        }
        let scale = a / t;
        let mut row = vec![(u, scale)];
        row.extend(inst.neighbors(u).iter().map(|&(v, w)| (v, scale * w)));
        row.push((n, 1.0));
        lp.add(row, Relation::Ge, a);
    }
    lp
}

/// Probability LP over variables `(p_0..p_{k-1}, L)` for a fixed support
/// with the given defending statuses: minimize `L` with `sum p = 1` and
/// `(1 - sum_i p_i x_iu) * alpha_u <= L`.
///
/// Nodes sharing a status pattern across the support give parallel rows, so
/// only the one with the largest value is kept.
pub fn build_prob_lp(inst: &Instance, statuses: &[Vec<bool>]) -> Result<LpProblem> {
    let k = statuses.len();
    if k == 0 {
        return Err(Error::contract("probability LP needs a nonempty support"));
    }
    let n = inst.n();
    if let Some(s) = statuses.iter().find(|s| s.len() != n) {
        return Err(Error::Dimension { expected: n, got: s.len() });
    }

    let mut strongest: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut order = Vec::new();
    for u in 0..n {
        if inst.alpha()[u] == 0.0 {
            continue;
        }
        let pattern: Vec<bool> = statuses.iter().map(|s| s[u]).collect();
        match strongest.get_mut(&pattern) {
            Some(best) => {
                if inst.alpha()[u] > inst.alpha()[*best] {
                    *best = u;
                }
            }
            None => {
                strongest.insert(pattern.clone(), u);
                order.push(pattern);
            }
        }
    }

    let mut lp = LpProblem::new(k + 1).minimize(vec![(k, 1.0)]);
    lp.add((0..k).map(|i| (i, 1.0)).collect(), Relation::Eq, 1.0);
    for pattern in order {
        let u = strongest[&pattern];
        let a = inst.alpha()[u];
        let mut row: Vec<(usize, f64)> = pattern.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| (i, a)).collect();
        row.push((k, 1.0));
        lp.add(row, Relation::Ge, a);
    }
    Ok(lp)
}
