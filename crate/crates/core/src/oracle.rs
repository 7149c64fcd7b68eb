//! Exact optimal mixed strategies for small instances, and generators for
//! two hard instance families.
//!
//! # Why maximal statuses suffice
//!
//! The status vector of a mixed strategy is the probability-weighted sum of
//! the statuses of its pure strategies, and each pure status is the
//! indicator of a defendable set. Every defendable set lies inside a
//! maximal defendable set, whose indicator is componentwise at least as
//! large; a node's loss `alpha_u * (1 - x_u)` only falls as `x_u` grows.
//! Replacing each pure strategy by a witness for a maximal set containing
//! its defended nodes therefore never increases any node's loss, with or
//! without resource sharing. A witness for a maximal set defends exactly
//! that set (anything more would contradict maximality). So the probability
//! LP over all maximal statuses attains `OPT_m`.

use crate::error::{Error, Result};
use crate::lp::{build_prob_lp, can_defend, fits, solve, LpStatus};
use crate::model::{defending_power, mixed_loss, Edge, Instance, MixedStrategy, PureStrategy, EPS_STATUS};

/// Default largest instance the oracle accepts.
pub const DEFAULT_LIMIT: usize = 14;

/// Hard cap on `limit_n`, whatever the caller asks for.
const MAX_LIMIT: usize = 20;

/// A maximal defendable set with a strategy that defends it.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalStatus {
    pub status: Vec<bool>,
    pub witness: PureStrategy,
}

fn check_size(inst: &Instance, limit_n: usize) -> Result<()> {
    let limit = limit_n.min(MAX_LIMIT);
    if inst.n() > limit {
        return Err(Error::Size { n: inst.n(), limit });
    }
    Ok(())
}

/// All maximal defendable sets as status vectors, sorted lexicographically
/// (`false < true`).
pub fn enumerate_feasible_statuses(inst: &Instance, limit_n: usize) -> Result<Vec<Vec<bool>>> {
    Ok(maximal_statuses(inst, limit_n)?.into_iter().map(|m| m.status).collect())
}

/// [`enumerate_feasible_statuses`] with witnesses.
///
/// Defendable sets are closed under taking subsets, so a depth-first search
/// that adds nodes in increasing index order and only extends defendable
/// sets visits every one of them. A child is checked by reusing the
/// parent's witness when it already covers the new node, and by the
/// feasibility LP otherwise.
#[allow(clippy::needless_range_loop)]
pub fn maximal_statuses(inst: &Instance, limit_n: usize) -> Result<Vec<MaximalStatus>> {
    check_size(inst, limit_n)?;
    let n = inst.n();
    let mut witness: Vec<Option<PureStrategy>> = vec![None; 1 << n];
    let root = can_defend(inst, &[], inst.resource())?
        .ok_or_else(|| Error::Internal("empty set reported undefendable".into()))?;
    witness[0] = Some(root);

    let mut stack: Vec<(u32, usize)> = vec![(0, 0)];
    while let Some((mask, from)) = stack.pop() {
        let parent = witness[mask as usize].clone().expect("visited sets have witnesses");
        let power = if inst.is_isolated() { Vec::new() } else { defending_power(inst, &parent)? };
        for u in from..n {
            let child = mask | (1 << u);
            let found = if inst.is_isolated() {
                let set = members(child, n);
                let need: f64 = set.iter().map(|&v| inst.theta()[v]).sum();
                fits(need, inst.resource()).then(|| PureStrategy::covering(inst, &set))
            } else if power[u] >= inst.theta()[u] - EPS_STATUS {
                Some(parent.clone())
            } else {
                can_defend(inst, &members(child, n), inst.resource())?
            };
            if let Some(r) = found {
                witness[child as usize] = Some(r);
                stack.push((child, u + 1));
            }
        }
    }

    let mut out = Vec::new();
    for (mask, w) in witness.iter().enumerate() {
        let Some(w) = w else { continue };
        let maximal = (0..n).all(|u| mask & (1 << u) != 0 || witness[mask | (1 << u)].is_none());
        if maximal {
            out.push(MaximalStatus { status: (0..n).map(|u| mask & (1 << u) != 0).collect(), witness: w.clone() });
        }
    }
    out.sort_by(|a, b| a.status.cmp(&b.status));
    Ok(out)
}

fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&u| mask & (1 << u) != 0).collect()
}

/// The optimal mixed strategy and `OPT_m`, by the probability LP over all
/// maximal statuses. Strategies with zero probability are dropped.
pub fn exact_opt_mixed(inst: &Instance, limit_n: usize) -> Result<(MixedStrategy, f64)> {
    let maximal = maximal_statuses(inst, limit_n)?;
    let probs = if maximal.len() == 1 {
        vec![1.0]
    } else {
        let statuses: Vec<Vec<bool>> = maximal.iter().map(|m| m.status.clone()).collect();
        let sol = solve(&build_prob_lp(inst, &statuses)?)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Solver(format!("probability LP reported {:?}", sol.status)));
        }
        sol.x[..maximal.len()].iter().map(|p| p.clamp(0.0, 1.0)).collect()
    };
    let mut m = MixedStrategy::default();
    for (s, p) in maximal.into_iter().zip(probs) {
        if p > 0.0 {
            m.support.push(s.witness);
            m.probs.push(p);
        }
    }
    let (_, result) = mixed_loss(inst, &m)?;
    Ok((m, result))
}

/// Instance with one unit-value node per number, threshold equal to the
/// number, no edges, and budget half the total. Its `OPT_m` is `1/2`
/// exactly when the numbers split into two halves of equal sum.
pub fn gen_even_partition_instance(numbers: &[f64]) -> Result<Instance> {
    if numbers.is_empty() {
        return Err(Error::contract("need at least one number"));
    }
    if let Some(a) = numbers.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::contract(format!("numbers must be positive, got {a}")));
    }
    let total: f64 = numbers.iter().sum();
    Instance::isolated(numbers.to_vec(), vec![1.0; numbers.len()], total / 2.0)
}

/// Whether `numbers` split into two parts of equal sum, by checking every
/// subset containing the first number (at most 24 numbers).
pub fn has_even_partition(numbers: &[f64]) -> Result<bool> {
    let n = numbers.len();
    if n == 0 || n > 24 {
        return Err(Error::Size { n, limit: 24 });
    }
    let total: f64 = numbers.iter().sum();
    let tol = 1e-9 * total.max(1.0);
    let rest = n - 1;
    Ok((0u32..1 << rest).any(|mask| {
        let part: f64 = numbers[0] + (0..rest).filter(|&i| mask & (1 << i) != 0).map(|i| numbers[i + 1]).sum::<f64>();
        (2.0 * part - total).abs() <= tol
    }))
}

/// Side sizes `(|U|, |V|)` of the bipartite gap instance: `2 beta R` and
/// `4 beta^2 R`, rounded to the nearest integer.
pub fn bipartite_gap_sizes(beta: f64, resource: f64) -> Result<(usize, usize)> {
    if !(beta.is_finite() && beta >= 1.0) {
        return Err(Error::contract(format!("beta must be at least 1, got {beta}")));
    }
    if !(resource.is_finite() && resource > 0.0) {
        return Err(Error::contract(format!("budget must be positive, got {resource}")));
    }
    let u = (2.0 * beta * resource).round();
    let v = (4.0 * beta * beta * resource).round();
    if u < 1.0 || v < 1.0 {
        return Err(Error::contract("bipartite sides round to zero nodes"));
    }
    Ok((u as usize, v as usize))
}

/// Complete bipartite graph between `U` (nodes `0..|U|`) and `V` (the rest),
/// every edge weighted `1/|U|`, unit thresholds and values, budget `R`.
///
/// Spreading `1/(2 beta)` over each node of `U` gives a fractional result of
/// `1 - 1/(2 beta)`, while any pure strategy with budget `beta R` defends at
/// most `2 beta R` of the nodes.
pub fn gen_bipartite_gap_instance(beta: f64, resource: f64) -> Result<Instance> {
    let (nu, nv) = bipartite_gap_sizes(beta, resource)?;
    let n = nu + nv;
    let w = 1.0 / nu as f64;
    let edges = (0..nu).flat_map(|u| (nu..n).map(move |v| Edge { u, v, w })).collect();
    Instance::new(vec![1.0; n], vec![1.0; n], edges, resource)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::optimal_fractional;
    use crate::model::fixtures::*;
    use crate::model::{defending_status, fractional_loss, mixed_status};
    use crate::pure::optimal_pure;

    fn sets(statuses: &[Vec<bool>]) -> Vec<Vec<usize>> {
        statuses.iter().map(|s| (0..s.len()).filter(|&u| s[u]).collect()).collect()
    }

    #[test]
    fn example_one_statuses() {
        let st = enumerate_feasible_statuses(&example_one(), DEFAULT_LIMIT).unwrap();
        assert_eq!(st.len(), 6);
        assert!(st.windows(2).all(|w| w[0] < w[1]));
        assert!(sets(&st).iter().all(|s| s.len() == 2));
    }

    #[test]
    fn example_two_statuses() {
        let st = enumerate_feasible_statuses(&example_two(), DEFAULT_LIMIT).unwrap();
        assert_eq!(sets(&st), vec![vec![1, 2], vec![0, 2]]);
    }

    #[test]
    fn rich_budget_single_status() {
        let inst = example_two().with_resource(7.0).unwrap();
        assert_eq!(enumerate_feasible_statuses(&inst, DEFAULT_LIMIT).unwrap(), vec![vec![true; 3]]);
    }

    #[test]
    fn sharing_statuses_match_lp_per_subset() {
        let inst = gen_bipartite_gap_instance(1.0, 1.0).unwrap();
        let st = maximal_statuses(&inst, DEFAULT_LIMIT).unwrap();
        for m in &st {
            let x = defending_status(&inst, &m.witness).unwrap();
            assert_eq!(x, m.status);
        }
        // brute force: a set is feasible iff the LP says so; compare maximal families
        let n = inst.n();
        let feasible: Vec<bool> =
            (0u32..1 << n).map(|mask| can_defend(&inst, &members(mask, n), 1.0).unwrap().is_some()).collect();
        let mut want: Vec<Vec<bool>> = (0u32..1 << n)
            .filter(|&mask| {
                feasible[mask as usize] && (0..n).all(|u| mask & (1 << u) != 0 || !feasible[(mask | (1 << u)) as usize])
            })
            .map(|mask| (0..n).map(|u| mask & (1 << u) != 0).collect())
            .collect();
        want.sort();
        assert_eq!(st.into_iter().map(|m| m.status).collect::<Vec<_>>(), want);
    }

    #[test]
    fn size_limit() {
        let inst = Instance::isolated(vec![1.0; 15], vec![1.0; 15], 3.0).unwrap();
        assert!(matches!(enumerate_feasible_statuses(&inst, DEFAULT_LIMIT), Err(Error::Size { n: 15, limit: 14 })));
        assert!(exact_opt_mixed(&inst, 15).is_ok());
    }

    #[test]
    fn opt_m_examples() {
        let (m, v) = exact_opt_mixed(&example_one(), DEFAULT_LIMIT).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        assert!(m.total_prob() <= 1.0 + 1e-9);
        let (_, v) = exact_opt_mixed(&example_two(), DEFAULT_LIMIT).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        let broke = example_two().with_resource(0.0).unwrap();
        assert_eq!(exact_opt_mixed(&broke, DEFAULT_LIMIT).unwrap().1, 2.0);
    }

    #[test]
    fn opt_m_witness_is_consistent() {
        let (m, v) = exact_opt_mixed(&example_one(), DEFAULT_LIMIT).unwrap();
        let x = mixed_status(&example_one(), &m).unwrap();
        let worst = x.iter().zip(example_one().alpha()).map(|(x, a)| a * (1.0 - x)).fold(0.0, f64::max);
        assert!((worst - v).abs() < 1e-12);
    }

    #[test]
    fn even_partition_examples() {
        let inst = gen_even_partition_instance(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(inst.theta(), &[1.0, 1.0, 2.0]);
        assert_eq!(inst.resource(), 2.0);
        assert!((exact_opt_mixed(&inst, DEFAULT_LIMIT).unwrap().1 - 0.5).abs() < 1e-9);

        let inst = gen_even_partition_instance(&[1.0, 1.0, 1.0]).unwrap();
        assert!(exact_opt_mixed(&inst, DEFAULT_LIMIT).unwrap().1 > 0.5 + 1e-9);
        assert!(!has_even_partition(&[1.0, 1.0, 1.0]).unwrap());

        let inst = gen_even_partition_instance(&[2.0, 2.0]).unwrap();
        assert!((exact_opt_mixed(&inst, DEFAULT_LIMIT).unwrap().1 - 0.5).abs() < 1e-9);
        assert!(gen_even_partition_instance(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn partition_search() {
        assert!(has_even_partition(&[3.0, 1.0, 1.0, 2.0, 2.0, 1.0]).unwrap());
        assert!(!has_even_partition(&[2.0, 3.0, 4.0]).unwrap());
        assert!(!has_even_partition(&[5.0]).unwrap());
    }

    #[test]
    fn bipartite_shape() {
        let inst = gen_bipartite_gap_instance(2.0, 1.0).unwrap();
        assert_eq!(bipartite_gap_sizes(2.0, 1.0).unwrap(), (4, 16));
        assert_eq!(inst.n(), 20);
        assert_eq!(inst.edges().len(), 64);
        assert!(inst.edges().iter().all(|e| e.w == 0.25 && e.u < 4 && e.v >= 4));
        assert!(gen_bipartite_gap_instance(0.5, 1.0).is_err());
    }

    #[test]
    fn bipartite_fractional_value() {
        for beta in [1.5, 2.0] {
            let inst = gen_bipartite_gap_instance(beta, 1.0).unwrap();
            let (nu, _) = bipartite_gap_sizes(beta, 1.0).unwrap();
            let mut r = vec![0.0; inst.n()];
            r[..nu].iter_mut().for_each(|x| *x = 1.0 / (2.0 * beta));
            let (_, l) = fractional_loss(&inst, &PureStrategy(r)).unwrap();
            assert!((l - (1.0 - 1.0 / (2.0 * beta))).abs() < 1e-12);
            let (_, opt) = optimal_fractional(&inst, 1.0).unwrap();
            assert!(opt <= l + 1e-9);
        }
    }

    #[test]
    fn ordering_on_small_instances() {
        for inst in [example_one(), example_two(), path_ab(), gen_bipartite_gap_instance(1.0, 1.0).unwrap()] {
            let (_, p) = optimal_pure(&inst).unwrap();
            let (_, m) = exact_opt_mixed(&inst, DEFAULT_LIMIT).unwrap();
            let (_, f) = optimal_fractional(&inst, inst.resource()).unwrap();
            assert!(p >= m - 1e-9 && m >= f - 1e-9, "{p} {m} {f}");
        }
    }
}
