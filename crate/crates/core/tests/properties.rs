//! Property tests over random graphs.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nfcg::equivalence::{
    cliques_and_separators, cliques_and_separators_seeded, equivalent, essential_graph, essential_graph_random_order,
    idle_core, legal_mergings, merge,
};
use nfcg::generate::{random_nf_chain_graph, random_undirected};
use nfcg::graph::{classify, closed_neighborhoods, parse_graph};
use nfcg::symmetry::{breakdown_bound, g0_pattern, g0_pattern_via_essential, group_description, min_sample_size};
use nfcg::{HybridGraph, Permutation, VertexSet};

use common::{brute_force_automorphisms, subsets};

fn nf_graph(max_m: usize) -> impl Strategy<Value = HybridGraph> {
    (1..=max_m, any::<u64>(), 1u32..=9).prop_map(|(m, seed, p)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_nf_chain_graph(m, p as f64 / 10.0, &mut rng)
    })
}

/// Any hybrid graph, cycles and flags included: each pair is absent, an
/// arrow either way, or an undirected edge.
fn any_graph(max_m: usize) -> impl Strategy<Value = HybridGraph> {
    (1..=max_m).prop_flat_map(|m| {
        let pairs = m * (m - 1) / 2;
        prop::collection::vec(0u8..4, pairs).prop_map(move |codes| {
            let mut h = HybridGraph::new(m);
            let mut it = codes.into_iter();
            for i in 0..m {
                for j in i + 1..m {
                    match it.next().unwrap() {
                        1 => h.add_arrow(i, j).unwrap(),
                        2 => h.add_arrow(j, i).unwrap(),
                        3 => h.add_edge(i, j).unwrap(),
                        _ => {}
                    }
                }
            }
            h
        })
    })
}

fn relabel_strategy(max_m: usize) -> impl Strategy<Value = (HybridGraph, Vec<usize>)> {
    nf_graph(max_m).prop_flat_map(|h| {
        let m = h.m();
        (Just(h), Just((0..m).collect::<Vec<usize>>()).prop_shuffle())
    })
}

/// Maximal cliques by brute force over all subsets.
fn maximal_cliques(u: &HybridGraph) -> BTreeSet<VertexSet> {
    let cliques: Vec<VertexSet> = subsets(u.m()).filter(|&s| !s.is_empty() && u.is_clique(s)).collect();
    cliques
        .iter()
        .copied()
        .filter(|&c| !cliques.iter().any(|&d| d != c && c.is_subset(d)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialize_parse_round_trip(h in any_graph(8)) {
        prop_assert_eq!(parse_graph(&h.serialize()).unwrap(), h);
    }

    #[test]
    fn essential_graph_is_an_equivalent_fixpoint(h in nf_graph(7)) {
        let hstar = essential_graph(&h).unwrap().graph;
        prop_assert!(classify(&hstar).is_nf_chain_graph());
        prop_assert!(equivalent(&h, &hstar).unwrap());
        prop_assert!(legal_mergings(&hstar).unwrap().is_empty());
        prop_assert_eq!(essential_graph(&hstar).unwrap().graph, hstar.clone());
        prop_assert!(hstar.num_undirected_edges() >= h.num_undirected_edges());
    }

    #[test]
    fn every_legal_merging_preserves_the_class(h in nf_graph(6)) {
        for ma in legal_mergings(&h).unwrap() {
            let merged = merge(&h, &ma).unwrap();
            prop_assert!(classify(&merged).is_nf_chain_graph());
            prop_assert!(equivalent(&h, &merged).unwrap());
        }
    }

    #[test]
    fn merging_order_does_not_matter(h in nf_graph(7)) {
        let hstar = essential_graph(&h).unwrap().graph;
        for seed in 0..20 {
            prop_assert_eq!(essential_graph_random_order(&h, seed).unwrap(), hstar.clone());
        }
    }

    #[test]
    fn essential_graph_commutes_with_relabelling((h, images) in relabel_strategy(7)) {
        let lhs = essential_graph(&h.relabel(&images)).unwrap().graph;
        let rhs = essential_graph(&h).unwrap().graph.relabel(&images);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn clique_data_is_order_independent(m in 1usize..=7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_undirected(m, 0.6, &mut rng);
        let Ok(base) = cliques_and_separators(&u) else {
            return Ok(());
        };
        let cliques: BTreeSet<VertexSet> = base.cliques.iter().copied().collect();
        prop_assert_eq!(&cliques, &maximal_cliques(&u));
        for s in 0..5 {
            let other = cliques_and_separators_seeded(&u, s).unwrap();
            prop_assert_eq!(other.cliques.iter().copied().collect::<BTreeSet<_>>(), cliques.clone());
            prop_assert_eq!(&other.separators, &base.separators);
            // running intersection
            let mut seen = VertexSet::EMPTY;
            for (k, &c) in other.cliques.iter().enumerate() {
                let sep = c.intersection(seen);
                prop_assert!(k == 0 || other.cliques[..k].iter().any(|&d| sep.is_subset(d)));
                seen = seen.union(c);
            }
        }
    }

    #[test]
    fn idle_set_is_the_set_of_full_down_sets(h in nf_graph(7)) {
        let hstar = essential_graph(&h).unwrap().graph;
        let nstar = closed_neighborhoods(&hstar);
        let full: VertexSet = (0..h.m())
            .filter(|&i| (0..h.m()).all(|j| nstar[i].is_subset(nstar[j])))
            .collect();
        prop_assert_eq!(idle_core(&hstar).unwrap().idle, full);
    }

    #[test]
    fn pattern_is_a_preorder_on_linked_pairs(h in nf_graph(7)) {
        let pattern = g0_pattern(&h).unwrap();
        prop_assert!(pattern.is_transitive());
        prop_assert_eq!(&pattern, &g0_pattern_via_essential(&h).unwrap());
        for i in 0..h.m() {
            prop_assert!(pattern.is_allowed(i, i));
            for j in pattern.row(i).without(i) {
                prop_assert!(h.is_linked(i, j));
            }
        }
    }

    #[test]
    fn group_factors_into_classes_and_quotient(h in nf_graph(6)) {
        let desc = group_description(&h).unwrap();
        let hstar = essential_graph(&h).unwrap().graph;
        prop_assert!(desc.automorphisms_complete);
        prop_assert!(desc.lifted_automorphisms[0].is_identity());
        let class_of = &desc.quotient.class_of;
        for p in &desc.lifted_automorphisms {
            prop_assert!(p.is_automorphism_of(&hstar));
            // a non-identity lift never stays inside the pattern
            if !p.is_identity() {
                prop_assert!((0..h.m()).any(|v| class_of[v] != class_of[p.apply(v)]));
            }
        }
        let class_perms: usize = desc
            .quotient
            .classes
            .iter()
            .map(|c| (1..=c.len()).product::<usize>())
            .product();
        let all = brute_force_automorphisms(&hstar);
        prop_assert_eq!(all.len(), desc.lifted_automorphisms.len() * class_perms);
        // each automorphism is a lift followed by a class-preserving permutation
        for sigma in &all {
            let matched = desc.lifted_automorphisms.iter().any(|l| {
                let rest: Permutation = l.inverse().compose(sigma);
                (0..h.m()).all(|v| class_of[rest.apply(v)] == class_of[v])
            });
            prop_assert!(matched);
        }
    }

    #[test]
    fn breakdown_bound_formula(h in nf_graph(6), extra in 0usize..10) {
        let d = min_sample_size(&h).unwrap();
        let n = d.max(1) + extra;
        let bound = breakdown_bound(&h, n).unwrap();
        prop_assert_eq!(*bound.numer() as usize * n, (n - d + 1).div_ceil(2) * *bound.denom() as usize);
        prop_assert!(*bound.numer() <= *bound.denom());
    }
}
