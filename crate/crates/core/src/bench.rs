//! Convergence data for one patching run next to its reference values.

use std::fmt::Write as _;
use std::time::Instant;

use crate::error::Result;
use crate::format::fmt_sig9;
use crate::fractional::optimal_fractional;
use crate::lp::fits;
use crate::model::Instance;
use crate::patching::{patch, PatchConfig, PatchTrace};
use crate::pure::optimal_pure;

/// A reference value and the time it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    /// `opt_p`, `opt_f` or `opt_f_shifted` (`OPT_f(R - theta_max)`).
    pub label: &'static str,
    pub value: f64,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub trace: PatchTrace,
    pub patch_ms: f64,
    pub references: Vec<Reference>,
}

impl BenchReport {
    pub fn reference(&self, label: &str) -> Option<f64> {
        self.references.iter().find(|r| r.label == label).map(|r| r.value)
    }

    /// The patching trace followed by one row per reference value, with the
    /// label in the `iter` column. Wall-clock columns are 0 unless `timing`.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = self.trace.to_csv(timing);
        for r in &self.references {
            let ms = if timing { r.ms } else { 0.0 };
            let _ = writeln!(out, "{},0,{},0,0,{}", r.label, fmt_sig9(r.value), fmt_sig9(ms));
        }
        out
    }
}

/// Patch for `d_max` rounds and compute `OPT_p`, `OPT_f(R)` and, without
/// resource sharing and when `R >= theta_max`, `OPT_f(R - theta_max)`.
pub fn bench_patching(inst: &Instance, d_max: usize, seed: u64) -> Result<BenchReport> {
    let cfg = PatchConfig::new(d_max, seed)?;
    let start = Instant::now();
    let out = patch(inst, &cfg)?;
    let patch_ms = elapsed_ms(start);

    let mut references = Vec::new();
    let start = Instant::now();
    let (_, opt_p) = optimal_pure(inst)?;
    references.push(Reference { label: "opt_p", value: opt_p, ms: elapsed_ms(start) });

    let start = Instant::now();
    let (_, opt_f) = optimal_fractional(inst, inst.resource())?;
    references.push(Reference { label: "opt_f", value: opt_f, ms: elapsed_ms(start) });

    if inst.is_isolated() && fits(inst.theta_max(), inst.resource()) {
        let start = Instant::now();
        let budget = (inst.resource() - inst.theta_max()).max(0.0);
        let (_, shifted) = optimal_fractional(inst, budget)?;
        references.push(Reference { label: "opt_f_shifted", value: shifted, ms: elapsed_ms(start) });
    }
    Ok(BenchReport { trace: out.trace, patch_ms, references })
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}
