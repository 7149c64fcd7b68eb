//! Stackelberg network security games with per-node defending thresholds.
//!
//! A defender spreads a budget `R` over the nodes of a weighted graph; a node
//! `u` counts as defended when its own allocation plus the weighted
//! allocations of its neighbors reach its threshold `theta_u`. An attacker
//! hits the node with the largest expected loss `alpha_u * (1 - x_u)`. This
//! crate computes optimal pure and fractional strategies, rounds fractional
//! strategies into mixed ones, builds small-support mixed strategies by
//! patching, and solves small instances exactly.

pub mod bench;
pub mod dataset;
pub mod error;
pub mod format;
pub mod fractional;
pub mod generate;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod patching;
pub mod pure;
pub mod rng;
pub mod rounding;

pub use error::{Error, Result};
pub use fractional::{opt_f_curve, optimal_fractional};
pub use model::{
    defending_power, defending_status, fractional_loss, mixed_loss, mixed_status, pure_loss, Edge, Instance,
    InstanceFile, LossVector, MixedStrategy, NodeSet, NodeSpec, PureStrategy, StrategyFile, EPS_FEAS, EPS_STATUS,
};
pub use oracle::{enumerate_feasible_statuses, exact_opt_mixed};
pub use patching::{patch, PatchConfig, PatchOutcome, PatchTrace};
pub use pure::optimal_pure;
pub use rounding::{round_to_mixed, upper_bound_mixed};
