#![allow(dead_code)]

use std::path::PathBuf;

use nfcg::{parse_graph, HybridGraph, Permutation, VertexSet};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("graphs")
        .join(format!("{name}.cg"))
}

pub fn fixture(name: &str) -> HybridGraph {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    parse_graph(&text).expect("fixture parses")
}

/// Fixtures that are chain graphs without flags.
pub const NF_FIXTURES: [&str; 10] = [
    "chain3",
    "chain3_b",
    "chain3_c",
    "collider",
    "sprinkle",
    "sprinkle_essential",
    "verma",
    "factor_2_3",
    "all_essential",
    "dag4",
];

/// Every subset of `[m]` as a bit set.
pub fn subsets(m: usize) -> impl Iterator<Item = VertexSet> {
    (0u64..(1 << m)).map(VertexSet::from_bits)
}

/// Brute-force automorphism group of `h` over all `m!` permutations.
pub fn brute_force_automorphisms(h: &HybridGraph) -> Vec<Permutation> {
    Permutation::all(h.m())
        .into_iter()
        .filter(|p| p.is_automorphism_of(h))
        .collect()
}
