use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use netdef_core::bench::bench_patching;
use netdef_core::dataset::{load_edge_list, random_graph};
use netdef_core::generate::{generate_instance, GenConfig};
use netdef_core::lp::build_fractional_lp;
use netdef_core::oracle::{gen_bipartite_gap_instance, gen_even_partition_instance, DEFAULT_LIMIT};
use netdef_core::rng::SplitMix64;
use netdef_core::{
    exact_opt_mixed, optimal_fractional, optimal_pure, patch, upper_bound_mixed, Error, Instance, PatchConfig, Result,
};

mod render;

#[derive(Parser)]
#[command(name = "netdef", version, about = "Network defense games with per-node defending thresholds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal pure strategy.
    SolvePure { instance: PathBuf },
    /// Optimal fractional strategy.
    SolveFrac {
        instance: PathBuf,
        /// Budget to use instead of the instance resource.
        #[arg(long)]
        budget: Option<f64>,
        /// Write the linear program in CPLEX LP format.
        #[arg(long, value_name = "FILE")]
        dump_lp: Option<PathBuf>,
    },
    /// Mixed strategy rounded from the fractional optimum at R - theta_max.
    RoundMixed { instance: PathBuf },
    /// Small-support mixed strategy by patching.
    Patch {
        instance: PathBuf,
        #[arg(long)]
        iters: usize,
        #[arg(long)]
        seed: u64,
        /// Write the per-iteration trace as CSV.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
    },
    /// Exact optimal mixed strategy by enumeration.
    Oracle {
        instance: PathBuf,
        /// Largest node count to accept.
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
    },
    /// Random instance on an edge list.
    Gen {
        #[arg(long, value_name = "FILE")]
        edges: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Drop all edges.
        #[arg(long)]
        isolated: bool,
        /// Use this threshold on every node.
        #[arg(long, value_name = "T")]
        uniform_theta: Option<f64>,
        /// Budget as a fraction of the total threshold.
        #[arg(long, value_name = "F", default_value_t = 0.2)]
        resource_frac: f64,
        /// Reject repeated or reversed edges instead of merging them.
        #[arg(long)]
        strict: bool,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Instances from the hardness constructions.
    GenHard {
        #[command(subcommand)]
        family: HardFamily,
    },
    /// Seeded uniformly random simple graph as an edge list.
    GenGraph {
        #[arg(long)]
        nodes: usize,
        #[arg(long = "edge-count")]
        edge_count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Patching trace with reference values as CSV.
    Bench {
        instance: PathBuf,
        #[arg(long)]
        iters: usize,
        #[arg(long)]
        seed: u64,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        /// Record wall-clock milliseconds instead of zeros.
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Subcommand)]
enum HardFamily {
    /// Two isolated nodes per number; a mixed loss of 0.5 means an even partition exists.
    EvenPartition {
        /// Comma-separated positive numbers.
        #[arg(long, value_delimiter = ',', conflicts_with = "seed")]
        numbers: Option<Vec<f64>>,
        /// Draw `size` integers from 1..=max instead.
        #[arg(long, requires = "size")]
        seed: Option<u64>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = 20)]
        max: i64,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Complete bipartite instance with a large fractional-to-pure gap.
    BipartiteGap {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        resource: f64,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::SolvePure { instance } => {
            let inst = read_instance(&instance)?;
            let (r, loss) = optimal_pure(&inst)?;
            println!("{}", render::pure_result(loss, &r));
        }
        Command::SolveFrac { instance, budget, dump_lp } => {
            let inst = read_instance(&instance)?;
            let budget = budget.unwrap_or(inst.resource());
            if let Some(path) = dump_lp {
                fs::write(path, build_fractional_lp(&inst, budget).to_cplex_lp())?;
            }
            let (r, loss) = optimal_fractional(&inst, budget)?;
            println!("{}", render::pure_result(loss, &r));
        }
        Command::RoundMixed { instance } => {
            let inst = read_instance(&instance)?;
            let (m, loss) = upper_bound_mixed(&inst)?;
            println!("{}", render::mixed_result(loss, &m));
        }
        Command::Patch { instance, iters, seed, trace } => {
            let inst = read_instance(&instance)?;
            let cfg = PatchConfig::new(iters, seed)?;
            let out = match patch(&inst, &cfg) {
                Ok(out) => out,
                Err(failure) => {
                    if let Some(path) = trace {
                        fs::write(path, failure.trace.to_csv(false))?;
                    }
                    return Err(failure.error);
                }
            };
            if let Some(path) = trace {
                fs::write(path, out.trace.to_csv(false))?;
            }
            println!("{}", render::mixed_result(out.result, &out.strategy));
        }
        Command::Oracle { instance, limit } => {
            let inst = read_instance(&instance)?;
            let (m, loss) = exact_opt_mixed(&inst, limit)?;
            println!("{}", render::mixed_result(loss, &m));
        }
        Command::Gen { edges, seed, isolated, uniform_theta, resource_frac, strict, output } => {
            let graph = load_edge_list(&edges, !strict)?;
            if graph.self_loops > 0 || graph.duplicates > 0 {
                eprintln!("dropped {} self-loops, merged {} repeated edges", graph.self_loops, graph.duplicates);
            }
            let cfg =
                GenConfig { seed, isolated, uniform_theta, resource_fraction: resource_frac, ..GenConfig::default() };
            write_instance(&output, &generate_instance(&graph, &cfg)?)?;
        }
        Command::GenHard { family } => match family {
            HardFamily::EvenPartition { numbers, seed, size, max, output } => {
                let numbers = match (numbers, seed, size) {
                    (Some(numbers), _, _) => numbers,
                    (None, Some(seed), Some(size)) => {
                        if max < 1 {
                            return Err(Error::Contract(format!("max {max} must be at least 1")));
                        }
                        let mut rng = SplitMix64::new(seed);
                        (0..size).map(|_| rng.int_in(1, max) as f64).collect()
                    }
                    _ => return Err(Error::Contract("give --numbers or --seed with --size".into())),
                };
                write_instance(&output, &gen_even_partition_instance(&numbers)?)?;
            }
            HardFamily::BipartiteGap { beta, resource, output } => {
                write_instance(&output, &gen_bipartite_gap_instance(beta, resource)?)?;
            }
        },
        Command::GenGraph { nodes, edge_count, seed, output } => {
            fs::write(output, random_graph(nodes, edge_count, seed)?.to_text())?;
        }
        Command::Bench { instance, iters, seed, output, timing } => {
            let inst = read_instance(&instance)?;
            let report = bench_patching(&inst, iters, seed)?;
            fs::write(output, report.to_csv(timing))?;
        }
    }
    Ok(())
}

fn read_instance(path: &Path) -> Result<Instance> {
    Instance::from_json(&fs::read_to_string(path)?)
}

fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    let mut text = render::instance_json(inst);
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
