//! Edge-list ingestion and a seeded random graph generator.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// An undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeList {
    pub n: usize,
    /// Edges in file order, each as it first appeared.
    pub edges: Vec<(usize, usize)>,
    pub self_loops: usize,
    /// Repeated or reversed edges that were merged.
    pub duplicates: usize,
    /// Original id of each compacted node.
    pub ids: Vec<u64>,
}

/// Parse whitespace-separated `u v` pairs. Lines starting with `#` and blank
/// lines are skipped, ids are compacted to `0..n` in order of first
/// appearance, and self-loops are dropped and counted.
///
/// With `directed_dedup`, a repeated edge or its reverse is merged into the
/// first occurrence; without it, such a line is a parse error.
pub fn parse_edge_list(text: &str, directed_dedup: bool) -> Result<EdgeList> {
    let mut out = EdgeList::default();
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected two node ids, found {} fields", fields.len()),
            });
        }
        let mut ends = [0usize; 2];
        for (slot, f) in ends.iter_mut().zip(&fields) {
            let id: u64 = f.parse().map_err(|_| Error::Parse { line: line_no, msg: format!("bad node id {f:?}") })?;
            *slot = *index.entry(id).or_insert_with(|| {
                out.ids.push(id);
                out.ids.len() - 1
            });
        }
        let [u, v] = ends;
        if u == v {
            out.self_loops += 1;
            continue;
        }
        if !seen.insert((u.min(v), u.max(v))) {
            if !directed_dedup {
                return Err(Error::Parse { line: line_no, msg: format!("repeated edge {} {}", fields[0], fields[1]) });
            }
            out.duplicates += 1;
            continue;
        }
        out.edges.push((u, v));
    }
    out.n = out.ids.len();
    Ok(out)
}

pub fn load_edge_list(path: &Path, directed_dedup: bool) -> Result<EdgeList> {
    parse_edge_list(&std::fs::read_to_string(path)?, directed_dedup)
}

impl EdgeList {
    /// `u v` per line using the original ids.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{} {}", self.ids[u], self.ids[v]);
        }
        s
    }
}

/// A uniformly random simple graph with `n` nodes and `m` edges: endpoints
/// are drawn as pairs of node indices and rejected if they form a loop or
/// repeat an edge. Nodes without edges still count towards `n`.
pub fn random_graph(n: usize, m: usize, seed: u64) -> Result<EdgeList> {
    let max_edges = n.saturating_mul(n.saturating_sub(1)) / 2;
    if m > max_edges {
        return Err(Error::contract(format!("{m} edges do not fit a simple graph on {n} nodes")));
    }
    let mut rng = SplitMix64::new(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let u = rng.index(n);
        let v = rng.index(n);
        if u != v && seen.insert((u.min(v), u.max(v))) {
            edges.push((u, v));
        }
    }
    Ok(EdgeList { n, edges, self_loops: 0, duplicates: 0, ids: (0..n as u64).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_file() {
        let g = parse_edge_list("# c\n1 2\n2 1\n3 3\n", true).unwrap();
        assert_eq!(g.edges, vec![(0, 1)]);
        assert_eq!(g.self_loops, 1);
        assert_eq!(g.duplicates, 1);
        assert_eq!(g.n, 3);
        assert_eq!(g.ids, vec![1, 2, 3]);
    }

    #[test]
    fn strict_mode_rejects_repeats() {
        match parse_edge_list("1 2\n\n2 1\n", false) {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse_edge_list("1 2\n3\n", true), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_edge_list("1 x\n", true), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("1 2 3\n", true), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn compaction_follows_first_appearance() {
        let g = parse_edge_list("10 5\n5 7\n", true).unwrap();
        assert_eq!(g.ids, vec![10, 5, 7]);
        assert_eq!(g.edges, vec![(0, 1), (1, 2)]);
        assert_eq!(parse_edge_list(&g.to_text(), false).unwrap(), g);
    }

    #[test]
    fn random_graph_is_simple_and_seeded() {
        let g = random_graph(50, 300, 3).unwrap();
        assert_eq!(g.edges.len(), 300);
        let set: HashSet<_> = g.edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        assert_eq!(set.len(), 300);
        assert!(g.edges.iter().all(|&(u, v)| u != v && u < 50 && v < 50));
        assert_eq!(g, random_graph(50, 300, 3).unwrap());
        assert_ne!(g, random_graph(50, 300, 4).unwrap());
        assert!(random_graph(3, 4, 0).is_err());
        assert_eq!(random_graph(3, 3, 0).unwrap().edges.len(), 3);
    }
}
