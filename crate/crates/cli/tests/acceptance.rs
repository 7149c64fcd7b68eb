//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use netdef_core::dataset::random_graph;
use netdef_core::generate::{generate_instance, GenConfig};
use netdef_core::oracle::{gen_bipartite_gap_instance, gen_even_partition_instance, has_even_partition, DEFAULT_LIMIT};
use netdef_core::patching::progress_bound;
use netdef_core::rng::SplitMix64;
use netdef_core::{
    defending_status, exact_opt_mixed, optimal_fractional, optimal_pure, patch, upper_bound_mixed, Instance,
    PatchConfig, PureStrategy,
};

const TOL_EXACT: f64 = 1e-6;
const TOL_ORDER: f64 = 1e-6;
const TOL_SANDWICH: f64 = 1e-5;
const TOL_PROB: f64 = 1e-7;
const TOL_PARTITION: f64 = 1e-9;
const TOL_PROGRESS: f64 = 1e-6;

const DESK_NODES: usize = 1000;
const DESK_EDGES: usize = 27_000;
const DESK_SEED: u64 = 2024;
const DESK_PATCH_SEED: u64 = 7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn random_instance(rng: &mut SplitMix64, n: usize, isolated: bool) -> Instance {
    let max_edges = n * (n - 1) / 2;
    let m = rng.int_in(0, (2 * n).min(max_edges) as i64) as usize;
    let graph = random_graph(n, m, rng.next_u64()).unwrap();
    let cfg =
        GenConfig { seed: rng.next_u64(), isolated, resource_fraction: rng.uniform(0.1, 0.5), ..GenConfig::default() };
    generate_instance(&graph, &cfg).unwrap()
}

fn ac1_worked_examples() -> Outcome {
    let start = Instant::now();
    let one = Instance::isolated(vec![1.0; 4], vec![3.0, 3.0, 3.0, 1.0], 2.0).unwrap();
    let two = Instance::isolated(vec![3.0, 3.0, 1.0], vec![2.0, 2.0, 1.0], 4.0).unwrap();

    let (_, opt_p) = optimal_pure(&one).unwrap();
    let (_, opt_m1) = exact_opt_mixed(&one, DEFAULT_LIMIT).unwrap();
    let patch3 = patch(&one, &PatchConfig::new(3, 1).unwrap()).unwrap().result;
    let (_, opt_m2) = exact_opt_mixed(&two, DEFAULT_LIMIT).unwrap();
    let (_, opt_f2) = optimal_fractional(&two, 4.0).unwrap();
    let elapsed = start.elapsed();

    let checks = [
        ("ex1 OPT_p", opt_p, 3.0),
        ("ex1 OPT_m", opt_m1, 1.0),
        ("ex1 patch(3)", patch3, 1.0),
        ("ex2 OPT_m", opt_m2, 1.0),
        ("ex2 OPT_f(4)", opt_f2, 0.75),
    ];
    let failed: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| !close(*got, *want, TOL_EXACT))
        .map(|(name, got, want)| format!("{name} = {got} (want {want})"))
        .collect();
    let fast = elapsed < Duration::from_secs(1);
    let detail =
        if failed.is_empty() { format!("{elapsed:.2?}") } else { format!("{}; {elapsed:.2?}", failed.join(", ")) };
    outcome(failed.is_empty() && fast, detail)
}

fn ac2_ordering() -> Outcome {
    let start = Instant::now();
    let mut rng = SplitMix64::new(20_001);
    let mut bad = Vec::new();
    let count = 200;
    for k in 0..count {
        let n = rng.int_in(5, 14) as usize;
        let inst = random_instance(&mut rng, n, k % 2 == 0);
        let (_, p) = optimal_pure(&inst).unwrap();
        let (_, m) = exact_opt_mixed(&inst, DEFAULT_LIMIT).unwrap();
        let (_, f) = optimal_fractional(&inst, inst.resource()).unwrap();
        if !(p >= m - TOL_ORDER && m >= f - TOL_ORDER) {
            bad.push(format!("#{k}: {p} {m} {f}"));
        }
    }
    let elapsed = start.elapsed();
    let pass = bad.is_empty() && elapsed < Duration::from_secs(120);
    outcome(pass, format!("{count} instances, {} violations, {elapsed:.2?} {}", bad.len(), bad.join("; ")))
}

fn ac3_sandwich() -> Outcome {
    let mut rng = SplitMix64::new(30_001);
    let mut bad = Vec::new();
    let count = 100;
    for k in 0..count {
        let n = rng.int_in(5, 14) as usize;
        let base = random_instance(&mut rng, n, true);
        let lo = 2.0 * base.theta_max();
        let hi = base.theta_sum().max(lo);
        let inst = base.with_resource(rng.uniform(lo, hi)).unwrap();

        let (m, loss) = upper_bound_mixed(&inst).unwrap();
        let (_, shifted) = optimal_fractional(&inst, inst.resource() - inst.theta_max()).unwrap();
        let (_, opt_f) = optimal_fractional(&inst, inst.resource()).unwrap();
        let (_, opt_m) = exact_opt_mixed(&inst, DEFAULT_LIMIT).unwrap();
        let ok = close(loss, shifted, TOL_SANDWICH)
            && loss >= opt_f - TOL_EXACT
            && loss >= opt_m - TOL_SANDWICH
            && m.len() <= n * n
            && m.total_prob() <= 1.0 + TOL_PROB;
        if !ok {
            bad.push(format!(
                "#{k}: loss {loss} shifted {shifted} opt_f {opt_f} opt_m {opt_m} |D| {} sum {}",
                m.len(),
                m.total_prob()
            ));
        }
    }
    outcome(bad.is_empty(), format!("{count} instances, {} violations {}", bad.len(), bad.join("; ")))
}

fn ac4_convexity() -> Outcome {
    let mut rng = SplitMix64::new(40_001);
    let mut bad = Vec::new();
    let count = 100;
    for k in 0..count {
        let n = rng.int_in(5, 30) as usize;
        let inst = random_instance(&mut rng, n, k % 2 == 0);
        let r1 = rng.uniform(0.0, inst.theta_sum());
        let r2 = rng.uniform(0.0, inst.theta_sum());
        let (_, f1) = optimal_fractional(&inst, r1).unwrap();
        let (_, f2) = optimal_fractional(&inst, r2).unwrap();
        let (_, fm) = optimal_fractional(&inst, (r1 + r2) / 2.0).unwrap();
        if f1 + f2 < 2.0 * fm - TOL_EXACT {
            bad.push(format!("#{k}: {f1} + {f2} < 2 * {fm}"));
        }
    }
    outcome(bad.is_empty(), format!("{count} budget pairs, {} violations {}", bad.len(), bad.join("; ")))
}

fn ac5_even_partition() -> Outcome {
    let mut rng = SplitMix64::new(50_001);
    let mut bad = Vec::new();
    let mut with_partition = 0;
    let count = 60;
    for k in 0..count {
        let size = rng.int_in(2, 12) as usize;
        let numbers: Vec<f64> = (0..size).map(|_| rng.int_in(1, 20) as f64).collect();
        let exists = has_even_partition(&numbers).unwrap();
        with_partition += usize::from(exists);
        let (_, opt_m) = exact_opt_mixed(&gen_even_partition_instance(&numbers).unwrap(), DEFAULT_LIMIT).unwrap();
        if close(opt_m, 0.5, TOL_PARTITION) != exists {
            bad.push(format!("#{k}: {numbers:?} OPT_m {opt_m} partition {exists}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!("{count} multisets ({with_partition} with a partition), {} mismatches {}", bad.len(), bad.join("; ")),
    )
}

/// Random allocations of `budget`, alternating between spread, concentrated
/// on `U`, and greedy direct defense with the remainder spread over `U`.
fn sample_strategy(rng: &mut SplitMix64, n: usize, nu: usize, budget: f64, k: usize) -> PureStrategy {
    let mut r = vec![0.0; n];
    match k % 4 {
        0 => {
            let weights: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
            let total: f64 = weights.iter().sum();
            for (x, w) in r.iter_mut().zip(&weights) {
                *x = budget * w / total;
            }
        }
        1 => {
            let picks = 1 + rng.index(nu);
            for _ in 0..picks {
                r[rng.index(nu)] += budget / picks as f64;
            }
        }
        2 => {
            let direct = budget.floor() as usize;
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                order.swap(i, rng.index(i + 1));
            }
            for &u in order.iter().take(direct) {
                r[u] = 1.0;
            }
            let rest = budget - direct as f64;
            for x in r.iter_mut().take(nu) {
                *x += rest / nu as f64;
            }
        }
        _ => {
            let direct = rng.index(budget.floor() as usize + 1);
            for x in r.iter_mut().skip(nu).take(direct) {
                *x = 1.0;
            }
            let rest = budget - direct as f64;
            for x in r.iter_mut().take(nu) {
                *x += rest / nu as f64;
            }
        }
    }
    PureStrategy(r)
}

fn ac6_bipartite_gap() -> Outcome {
    let mut rng = SplitMix64::new(60_001);
    let resource = 2.0;
    let samples = 1000;
    let mut notes = Vec::new();
    let mut pass = true;
    for beta in [1.5, 2.0] {
        let inst = gen_bipartite_gap_instance(beta, resource).unwrap();
        let nu = (2.0 * beta * resource).round() as usize;
        let (_, opt_f) = optimal_fractional(&inst, resource).unwrap();
        let gap_ok = opt_f <= 1.0 - 1.0 / (2.0 * beta) + TOL_EXACT;

        let budget = beta * resource;
        let scaled = inst.with_resource(budget).unwrap();
        let limit = 2.0 * beta * resource;
        let mut worst = 0;
        for k in 0..samples {
            let r = sample_strategy(&mut rng, inst.n(), nu, budget, k);
            let defended = defending_status(&scaled, &r).unwrap().iter().filter(|&&x| x).count();
            worst = worst.max(defended);
        }
        let count_ok = worst as f64 <= limit;
        pass &= gap_ok && count_ok;
        notes.push(format!("beta {beta}: OPT_f {opt_f:.6}, most defended {worst} of limit {limit}"));
    }
    outcome(pass, notes.join("; "))
}

fn ac7_progress() -> Outcome {
    let mut rng = SplitMix64::new(70_001);
    let runs = 100;
    let mut checked = 0;
    let mut bad = Vec::new();
    for k in 0..runs {
        let n = rng.int_in(5, 40) as usize;
        let inst = random_instance(&mut rng, n, k % 2 == 0);
        let d = rng.int_in(2, 10) as usize;
        let out = patch(&inst, &PatchConfig::new(d, rng.next_u64()).unwrap()).unwrap();
        let recs = &out.trace.records;
        for pair in recs.windows(2) {
            let (old, new) = (&pair[0], &pair[1]);
            if new.result > old.result + TOL_PROGRESS {
                bad.push(format!("run {k}: result rose {} -> {}", old.result, new.result));
            }
            if old.covers_max && old.delta_l > 0.0 {
                checked += 1;
                let bound = progress_bound(inst.alpha_max(), old.result, old.delta_l);
                if new.result > bound + TOL_PROGRESS {
                    bad.push(format!("run {k} iter {}: {} > bound {bound}", old.iter, new.result));
                }
            }
        }
        let (_, opt_p) = optimal_pure(&inst).unwrap();
        let one = patch(&inst, &PatchConfig::new(1, k as u64).unwrap()).unwrap().result;
        if one != opt_p {
            bad.push(format!("run {k}: patch(1) {one} != OPT_p {opt_p}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!("{runs} runs, {checked} bounded rounds, {} violations {}", bad.len(), bad.join("; ")),
    )
}

fn desk_instance(uniform_theta: Option<f64>) -> Instance {
    let graph = random_graph(DESK_NODES, DESK_EDGES, DESK_SEED).unwrap();
    let cfg = GenConfig { seed: DESK_SEED, isolated: true, uniform_theta, ..GenConfig::default() };
    generate_instance(&graph, &cfg).unwrap()
}

fn ac8_desk_convergence() -> Outcome {
    let start = Instant::now();
    let inst = desk_instance(Some(1.0));
    let (_, opt_f) = optimal_fractional(&inst, inst.resource()).unwrap();
    let p5 = patch(&inst, &PatchConfig::new(5, DESK_PATCH_SEED).unwrap()).unwrap().result;
    let p30 = patch(&inst, &PatchConfig::new(30, DESK_PATCH_SEED).unwrap()).unwrap().result;
    let elapsed = start.elapsed();
    let gap5 = p5 / opt_f - 1.0;
    let gap30 = p30 / opt_f - 1.0;
    let pass = gap5 <= 0.05 && gap30 <= 0.01 && elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "OPT_f {opt_f:.6}, patch(5) {p5:.6} (+{:.2}%, limit 5%), patch(30) {p30:.6} (+{:.2}%, limit 1%), {elapsed:.2?}",
            100.0 * gap5,
            100.0 * gap30
        ),
    )
}

fn ac9_rounding_vs_patching() -> Outcome {
    let inst = desk_instance(None);
    let (rounded, ub) = upper_bound_mixed(&inst).unwrap();
    let patched = patch(&inst, &PatchConfig::new(30, DESK_PATCH_SEED).unwrap()).unwrap();
    let ratio = rounded.len() as f64 / patched.strategy.len() as f64;
    let diff = (ub - patched.result).abs() / ub.min(patched.result);
    let pass = ratio >= 5.0 && diff <= 0.05;
    outcome(
        pass,
        format!(
            "rounding |D| {} loss {ub:.6}, patch(30) |D| {} loss {:.6}, ratio {ratio:.2} (need 5), loss gap {:.2}%",
            rounded.len(),
            patched.strategy.len(),
            patched.result,
            100.0 * diff
        ),
    )
}

fn netdef(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_netdef")).current_dir(dir).args(args).output().unwrap();
    assert!(out.status.success(), "netdef {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn ac10_determinism() -> Outcome {
    let runs: Vec<Vec<Vec<u8>>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let d = dir.path();
            let mut outputs =
                vec![netdef(d, &["gen-graph", "--nodes", "40", "--edge-count", "90", "--seed", "3", "-o", "g.txt"])];
            outputs.push(netdef(d, &["gen", "--edges", "g.txt", "--seed", "5", "-o", "share.json"]));
            outputs.push(netdef(d, &["gen", "--edges", "g.txt", "--seed", "5", "--isolated", "-o", "iso.json"]));
            outputs.push(netdef(
                d,
                &[
                    "gen",
                    "--edges",
                    "g.txt",
                    "--seed",
                    "5",
                    "--isolated",
                    "--uniform-theta",
                    "1",
                    "--resource-frac",
                    "0.1",
                    "-o",
                    "uni.json",
                ],
            ));
            outputs.push(netdef(d, &["gen-hard", "even-partition", "--seed", "9", "--size", "8", "-o", "ep.json"]));
            outputs
                .push(netdef(d, &["gen-hard", "bipartite-gap", "--beta", "1.5", "--resource", "2", "-o", "bg.json"]));
            outputs.push(netdef(d, &["solve-pure", "share.json"]));
            outputs.push(netdef(d, &["solve-frac", "share.json", "--dump-lp", "lp.txt"]));
            outputs.push(netdef(d, &["solve-frac", "iso.json", "--budget", "7.5"]));
            outputs.push(netdef(d, &["round-mixed", "iso.json"]));
            outputs.push(netdef(d, &["patch", "share.json", "--iters", "8", "--seed", "11", "--trace", "trace.csv"]));
            outputs.push(netdef(d, &["oracle", "ep.json"]));
            outputs.push(netdef(d, &["bench", "iso.json", "--iters", "8", "--seed", "11", "-o", "bench.csv"]));
            for file in [
                "g.txt",
                "share.json",
                "iso.json",
                "uni.json",
                "ep.json",
                "bg.json",
                "lp.txt",
                "trace.csv",
                "bench.csv",
            ] {
                outputs.push(std::fs::read(d.join(file)).unwrap());
            }
            outputs
        })
        .collect();
    let differing = runs[0].iter().zip(&runs[1]).filter(|(a, b)| a != b).count();
    outcome(differing == 0, format!("{} outputs compared, {differing} differ", runs[0].len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("AC1 worked examples", ac1_worked_examples),
        ("AC2 ordering OPT_p >= OPT_m >= OPT_f", ac2_ordering),
        ("AC3 rounding sandwich", ac3_sandwich),
        ("AC4 convexity of OPT_f", ac4_convexity),
        ("AC5 even-partition family", ac5_even_partition),
        ("AC6 bipartite gap", ac6_bipartite_gap),
        ("AC7 patching progress", ac7_progress),
        ("AC8 desk-scale convergence", ac8_desk_convergence),
        ("AC9 rounding vs patching", ac9_rounding_vs_patching),
        ("AC10 determinism", ac10_determinism),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let o = run();
        failures += usize::from(!o.pass);
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
