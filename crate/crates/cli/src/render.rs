//! JSON output with every number printed to 9 significant digits.

use netdef_core::format::fmt_sig9;
use netdef_core::{Instance, MixedStrategy, PureStrategy};

fn numbers(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| fmt_sig9(x)).collect();
    format!("[{}]", items.join(","))
}

pub fn pure_result(loss: f64, r: &PureStrategy) -> String {
    format!("{{\"loss\":{},\"r\":{}}}", fmt_sig9(loss), numbers(r.as_slice()))
}

pub fn mixed_result(loss: f64, m: &MixedStrategy) -> String {
    let support: Vec<String> = m.support.iter().map(|r| numbers(r.as_slice())).collect();
    format!(
        "{{\"loss\":{},\"strategy\":{{\"support\":[{}],\"probs\":{}}}}}",
        fmt_sig9(loss),
        support.join(","),
        numbers(&m.probs)
    )
}

/// Instance files keep full precision so that reloading reproduces the
/// generated instance exactly.
pub fn instance_json(inst: &Instance) -> String {
    serde_json::to_string(&inst.to_file()).expect("instance serializes")
}
