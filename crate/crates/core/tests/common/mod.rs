#![allow(dead_code)]

use ipstab_core::{Graph, NodeId};
use rand::Rng;

/// Connected graph on `1..=n`: a random tree plus each other pair with probability `p`.
pub fn random_connected<R: Rng>(n: u32, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for v in 2..=n {
        edges.push((rng.gen_range(1..v), v));
    }
    for a in 1..=n {
        for b in a + 1..=n {
            if !edges.contains(&(a, b)) && rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Every labeled connected simple graph on `1..=n`.
pub fn all_connected(n: u32) -> Vec<Graph> {
    let pairs: Vec<(u32, u32)> = (1..=n)
        .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let edges: Vec<(u32, u32)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &e)| e)
            .collect();
        let g = Graph::from_edges(n, &edges).unwrap();
        if g.is_connected() {
            out.push(g);
        }
    }
    out
}

pub fn ids(v: &[u32]) -> Vec<NodeId> {
    v.iter().map(|&i| NodeId(i)).collect()
}
