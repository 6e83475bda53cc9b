//! Exhaustive and random graph families for property tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{is_dag, HybridGraph};
use crate::vertex_set::VertexSet;

/// Every labelled DAG on `m` vertices. Each unordered pair is absent or
/// oriented one of two ways; cyclic orientations are dropped.
pub fn all_dags(m: usize) -> Vec<HybridGraph> {
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for mut code in 0..total {
        let mut h = HybridGraph::new(m);
        for &(i, j) in &pairs {
            match code % 3 {
                1 => h.add_arrow(i, j).expect("fresh pair"),
                2 => h.add_arrow(j, i).expect("fresh pair"),
                _ => {}
            }
            code /= 3;
        }
        if is_dag(&h) {
            out.push(h);
        }
    }
    out
}

/// DAG with arrows along a random topological order, each present with
/// probability `p`.
pub fn random_dag(m: usize, p: f64, rng: &mut impl Rng) -> HybridGraph {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut h = HybridGraph::new(m);
    for a in 0..m {
        for b in a + 1..m {
            if rng.random_bool(p) {
                h.add_arrow(order[a], order[b]).expect("fresh pair");
            }
        }
    }
    h
}

pub fn random_undirected(m: usize, p: f64, rng: &mut impl Rng) -> HybridGraph {
    let mut h = HybridGraph::new(m);
    for i in 0..m {
        for j in i + 1..m {
            if rng.random_bool(p) {
                h.add_edge(i, j).expect("fresh pair");
            }
        }
    }
    h
}

/// Chain graph without flags. Vertices are split into ordered blocks with
/// random undirected edges inside each block; every connected piece of a
/// block then receives arrows from one random set of earlier vertices, so
/// all members of a component share their parents.
pub fn random_nf_chain_graph(m: usize, p: f64, rng: &mut impl Rng) -> HybridGraph {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut h = HybridGraph::new(m);
    let mut earlier = VertexSet::EMPTY;
    let mut start = 0;
    while start < m {
        let len = rng.random_range(1..=(m - start).min(3));
        let block = &order[start..start + len];
        for (x, &i) in block.iter().enumerate() {
            for &j in &block[x + 1..] {
                if rng.random_bool(p) {
                    h.add_edge(i, j).expect("fresh pair");
                }
            }
        }
        let mut remaining: VertexSet = block.iter().copied().collect();
        while let Some(v) = remaining.min() {
            let piece = undirected_reach(&h, v);
            let parents: VertexSet = earlier.iter().filter(|_| rng.random_bool(p)).collect();
            for a in parents {
                for b in piece {
                    h.add_arrow(a, b).expect("fresh pair");
                }
            }
            remaining = remaining.difference(piece);
        }
        earlier = earlier.union(block.iter().copied().collect());
        start += len;
    }
    h
}

fn undirected_reach(h: &HybridGraph, v: usize) -> VertexSet {
    let mut seen = VertexSet::singleton(v);
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        for y in h.neighbors(x).difference(seen) {
            seen.insert(y);
            stack.push(y);
        }
    }
    seen
}

/// Mixed family: DAGs, undirected graphs and chain graphs without flags in
/// rotation, with `m` drawn from `min_m..=max_m`.
pub fn mixed_family(count: usize, min_m: usize, max_m: usize, rng: &mut impl Rng) -> Vec<HybridGraph> {
    (0..count)
        .map(|k| {
            let m = rng.random_range(min_m..=max_m);
            match k % 3 {
                0 => random_dag(m, 0.5, rng),
                1 => random_undirected(m, 0.5, rng),
                _ => random_nf_chain_graph(m, 0.5, rng),
            }
        })
        .collect()
}
