//! Optimal fractional strategy, `OPT_f`, as a function of the budget.

use crate::error::{Error, Result};
use crate::lp::{build_fractional_lp, solve, LpStatus};
use crate::model::{Instance, PureStrategy};

/// Solve the fractional LP at `budget`; returns the allocation and `OPT_f(budget)`.
pub fn optimal_fractional(inst: &Instance, budget: f64) -> Result<(PureStrategy, f64)> {
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::contract(format!("budget {budget} must be nonnegative")));
    }
    let n = inst.n();
    let sol = solve(&build_fractional_lp(inst, budget))?;
    match sol.status {
        LpStatus::Optimal => {
            let r = PureStrategy(sol.x[..n].iter().map(|v| v.max(0.0)).collect());
            Ok((r, sol.objective.max(0.0)))
        }
        other => Err(Error::Solver(format!("fractional LP reported {other:?}"))),
    }
}

/// `OPT_f` at each budget, solved independently.
pub fn opt_f_curve(inst: &Instance, budgets: &[f64]) -> Result<Vec<f64>> {
    budgets.iter().map(|&b| optimal_fractional(inst, b).map(|(_, v)| v)).collect()
}
