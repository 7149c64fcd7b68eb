//! Dense two-phase tableau simplex.
//!
//! Pricing is Dantzig's largest-coefficient rule with Harris' ratio test.
//! The ratio test runs on a slightly perturbed right-hand side, which breaks
//! the heavy degeneracy of the probability LPs; the unperturbed right-hand
//! side is carried along as a second column and gives the reported solution.
//! After a run of degenerate pivots the solver switches to Bland's rule
//! until the objective moves again, which rules out cycling.

use super::{LpProblem, LpSolution, LpStatus, Relation, EPS_LP};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;
const PROGRESS_TOL: f64 = 1e-12;
const HARRIS_TOL: f64 = 1e-9;
const PERTURB: f64 = 1e-9;
const DRIVE_OUT_TOL: f64 = 1e-7;

/// Deterministic rhs shift in `[1, 2) * PERTURB * (1 + |b|)`, varied by row.
fn perturbation(row: usize, b: f64) -> f64 {
    let h = (row as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40;
    let frac = h as f64 / (1u64 << 24) as f64;
    PERTURB * (1.0 + b.abs()) * (1.0 + frac)
}

/// How an original variable maps onto nonnegative tableau columns:
/// `x = offset + sign * col (- col_neg)`.
#[derive(Debug, Clone, Copy)]
struct VarMap {
    col: usize,
    sign: f64,
    offset: f64,
    neg_col: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major, `cols + 2` entries per row: the perturbed rhs at `cols`
    /// and the exact rhs at `cols + 1`.
    a: Vec<f64>,
    basis: Vec<usize>,
    kind: Vec<Kind>,
    /// Artificial columns that left the basis and may never re-enter.
    dead: Vec<bool>,
    /// Reduced costs, `cols + 2` entries; the last two are minus the
    /// objective under the perturbed and the exact rhs.
    cost: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 2
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.width() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.a[i * self.width() + self.cols]
    }

    fn exact_rhs(&self, i: usize) -> f64 {
        self.a[i * self.width() + self.cols + 1]
    }

    fn enterable(&self, j: usize, phase_one: bool) -> bool {
        !self.dead[j] && (phase_one || self.kind[j] != Kind::Artificial)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let piv = self.a[r * w + c];
        let row_start = r * w;
        for j in 0..w {
            self.a[row_start + j] /= piv;
        }
        self.a[row_start + c] = 1.0;

        let nz: Vec<usize> =
            (0..w).filter(|&j| self.a[row_start + j] != 0.0 && !self.dead.get(j).copied().unwrap_or(false)).collect();
        let pivot_row: Vec<f64> = nz.iter().map(|&j| self.a[row_start + j]).collect();

        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let factor = self.a[i * w + c];
            if factor == 0.0 {
                continue;
            }
            let base = i * w;
            for (&j, &v) in nz.iter().zip(&pivot_row) {
                self.a[base + j] -= factor * v;
            }
            self.a[base + c] = 0.0;
        }
        let factor = self.cost[c];
        if factor != 0.0 {
            for (&j, &v) in nz.iter().zip(&pivot_row) {
                self.cost[j] -= factor * v;
            }
            self.cost[c] = 0.0;
        }

        let leaving = self.basis[r];
        if self.kind[leaving] == Kind::Artificial {
            self.dead[leaving] = true;
        }
        self.basis[r] = c;
    }

    /// Leaving row for entering column `c`. Harris' two-pass test: find the
    /// smallest ratio with every rhs relaxed by `HARRIS_TOL`, then take the
    /// largest pivot among rows within that bound. Under Bland's rule the
    /// plain minimum ratio is used with ties going to the smallest basic index.
    fn ratio_test(&self, c: usize, bland: bool) -> Option<usize> {
        let eligible = (0..self.rows).filter(|&i| self.at(i, c) > PIVOT_TOL);
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for i in eligible {
                let ratio = self.rhs(i).max(0.0) / self.at(i, c);
                let better = match best {
                    None => true,
                    Some((bi, br)) => {
                        if (ratio - br).abs() <= 1e-12 * (1.0 + br) {
                            self.basis[i] < self.basis[bi]
                        } else {
                            ratio < br
                        }
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            return best.map(|(i, _)| i);
        }
        let bound =
            eligible.clone().map(|i| (self.rhs(i).max(0.0) + HARRIS_TOL) / self.at(i, c)).fold(f64::INFINITY, f64::min);
        if bound == f64::INFINITY {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for i in eligible {
            let a = self.at(i, c);
            if self.rhs(i).max(0.0) / a <= bound && best.is_none_or(|(bi, _)| a > self.at(bi, c)) {
                best = Some((i, a));
            }
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self, phase_one: bool) -> Result<Outcome> {
        let mut bland = false;
        let mut stalled = 0usize;
        let mut best = -self.cost[self.cols];
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::Solver(format!("iteration limit {} reached", self.max_iterations)));
            }

            let entering = if bland {
                (0..self.cols).find(|&j| self.enterable(j, phase_one) && self.cost[j] < -COST_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.cols {
                    let d = self.cost[j];
                    if d < -COST_TOL && self.enterable(j, phase_one) && best.is_none_or(|(_, b)| d < b) {
                        best = Some((j, d));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(c) = entering else {
                return Ok(Outcome::Optimal);
            };

            let Some(r) = self.ratio_test(c, bland) else {
                if phase_one {
                    return Err(Error::Solver("phase one reported unbounded".into()));
                }
                return Ok(Outcome::Unbounded);
            };

            self.pivot(r, c);
            self.iterations += 1;

            // Progress is measured on the objective: Harris' test can take
            // tiny backward steps that a zero-ratio check would miss.
            let value = -self.cost[self.cols];
            if value < best - PROGRESS_TOL * (1.0 + best.abs()) {
                best = value;
                stalled = 0;
                bland = false;
            } else {
                stalled += 1;
                if stalled >= DEGENERATE_RUN {
                    bland = true;
                }
            }
        }
    }

    /// Reduced costs of `costs` for the current basis.
    fn price(&mut self, costs: &[f64]) {
        let w = self.width();
        let mut d = vec![0.0; w];
        d[..self.cols].copy_from_slice(&costs[..self.cols]);
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let base = i * w;
            for (dj, aj) in d.iter_mut().zip(&self.a[base..base + w]) {
                *dj -= cb * aj;
            }
        }
        for i in 0..self.rows {
            d[self.basis[i]] = 0.0;
        }
        self.cost = d;
    }
}

pub(super) fn solve(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;

    // Variable substitution onto nonnegative columns.
    let mut maps = Vec::with_capacity(p.num_vars);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..p.num_vars {
        let (lo, hi) = (p.lower[j], p.upper[j]);
        let map = if lo.is_finite() {
            if hi.is_finite() {
                bound_rows.push((ncols, hi - lo));
            }
            VarMap { col: ncols, sign: 1.0, offset: lo, neg_col: None }
        } else if hi.is_finite() {
            VarMap { col: ncols, sign: -1.0, offset: hi, neg_col: None }
        } else {
            ncols += 1;
            VarMap { col: ncols - 1, sign: 1.0, offset: 0.0, neg_col: Some(ncols) }
        };
        ncols += 1;
        maps.push(map);
    }
    let nstruct = ncols;

    // Rows in terms of tableau columns, rhs made nonnegative.
    struct Row {
        coeffs: Vec<(usize, f64)>,
        rel: Relation,
        rhs: f64,
    }
    let mut rows: Vec<Row> = Vec::with_capacity(p.constraints.len() + bound_rows.len());
    for con in &p.constraints {
        let mut coeffs = Vec::with_capacity(con.coeffs.len());
        let mut rhs = con.rhs;
        for &(j, a) in &con.coeffs {
            let m = maps[j];
            rhs -= a * m.offset;
            coeffs.push((m.col, a * m.sign));
            if let Some(nc) = m.neg_col {
                coeffs.push((nc, -a));
            }
        }
        rows.push(Row { coeffs, rel: con.relation, rhs });
    }
    for &(col, span) in &bound_rows {
        rows.push(Row { coeffs: vec![(col, 1.0)], rel: Relation::Le, rhs: span });
    }
    for row in &mut rows {
        if row.rhs < 0.0 {
            row.rhs = -row.rhs;
            row.coeffs.iter_mut().for_each(|(_, a)| *a = -*a);
            row.rel = match row.rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let nslack = rows.iter().filter(|r| r.rel != Relation::Eq).count();
    let nart = rows.iter().filter(|r| r.rel != Relation::Le).count();
    let cols = nstruct + nslack + nart;
    let w = cols + 2;

    let mut kind = vec![Kind::Structural; nstruct];
    kind.extend(std::iter::repeat_n(Kind::Slack, nslack));
    kind.extend(std::iter::repeat_n(Kind::Artificial, nart));

    let mut t = Tableau {
        rows: m,
        cols,
        a: vec![0.0; m * w],
        basis: vec![0; m],
        kind,
        dead: vec![false; cols],
        cost: Vec::new(),
        iterations: 0,
        max_iterations: 50 * (m + cols) + 1000,
    };
    let mut next_slack = nstruct;
    let mut next_art = nstruct + nslack;
    for (i, row) in rows.iter().enumerate() {
        let base = i * w;
        for &(j, a) in &row.coeffs {
            t.a[base + j] += a;
        }
        t.a[base + cols] = row.rhs + perturbation(i, row.rhs);
        t.a[base + cols + 1] = row.rhs;
        match row.rel {
            Relation::Le => {
                t.a[base + next_slack] = 1.0;
                t.basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                t.a[base + next_slack] = -1.0;
                next_slack += 1;
                t.a[base + next_art] = 1.0;
                t.basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                t.a[base + next_art] = 1.0;
                t.basis[i] = next_art;
                next_art += 1;
            }
        }
    }

    if nart > 0 {
        let phase_one: Vec<f64> = t.kind.iter().map(|&k| if k == Kind::Artificial { 1.0 } else { 0.0 }).collect();
        t.price(&phase_one);
        t.run(true)?;
        let infeasibility = -t.cost[cols + 1];
        let scale = rows.iter().map(|r| r.rhs.abs()).fold(1.0, f64::max);
        if infeasibility > EPS_LP * scale {
            return Ok(LpSolution { status: LpStatus::Infeasible, x: Vec::new(), objective: f64::NAN });
        }
        // Drive zero-level artificials out where possible; rows where that
        // fails are redundant and stay inert.
        for i in 0..m {
            if t.kind[t.basis[i]] != Kind::Artificial {
                continue;
            }
            let candidate = (0..nstruct + nslack)
                .filter(|&j| t.at(i, j).abs() > DRIVE_OUT_TOL)
                .max_by(|&x, &y| t.at(i, x).abs().total_cmp(&t.at(i, y).abs()));
            if let Some(j) = candidate {
                t.pivot(i, j);
            }
        }
        for j in 0..cols {
            if t.kind[j] == Kind::Artificial && !t.basis.contains(&j) {
                t.dead[j] = true;
            }
        }
    }

    let mut costs = vec![0.0; cols];
    for &(j, c) in &p.objective {
        let map = maps[j];
        costs[map.col] += c * map.sign;
        if let Some(nc) = map.neg_col {
            costs[nc] -= c;
        }
    }
    t.price(&costs);
    if let Outcome::Unbounded = t.run(false)? {
        return Ok(LpSolution { status: LpStatus::Unbounded, x: Vec::new(), objective: f64::NEG_INFINITY });
    }

    let mut col_value = vec![0.0; cols];
    for i in 0..m {
        col_value[t.basis[i]] = t.exact_rhs(i).max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| {
            let mut v = m.offset + m.sign * col_value[m.col];
            if let Some(nc) = m.neg_col {
                v -= col_value[nc];
            }
            v
        })
        .collect();

    let violation = p.max_scaled_violation(&x);
    if violation > EPS_LP {
        return Err(Error::Solver(format!("solution violates constraints by {violation:e} (scaled)")));
    }
    let objective = p.objective_value(&x);
    Ok(LpSolution { status: LpStatus::Optimal, x, objective })
}
