//! Seeded workloads shared by the criterion benchmarks.

use netdef_core::dataset::random_graph;
use netdef_core::generate::{generate_instance, GenConfig};
use netdef_core::Instance;

/// Random instance on `n` nodes with about `degree * n / 2` edges.
pub fn workload(n: usize, degree: usize, isolated: bool, uniform_theta: bool, seed: u64) -> Instance {
    let graph = random_graph(n, n * degree / 2, seed).expect("edge count fits");
    let cfg = GenConfig { seed, isolated, uniform_theta: uniform_theta.then_some(1.0), ..GenConfig::default() };
    generate_instance(&graph, &cfg).expect("default ranges are valid")
}
