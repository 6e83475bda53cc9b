//! Markov equivalence of chain graphs without flags: the skeleton/immorality
//! test, legal merging of components, essential graphs, the idle/core split,
//! and clique/separator data of decomposable components.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{components, immoralities, require_chain, require_nf, skeleton, HybridGraph};
use crate::vertex_set::VertexSet;

/// All arrows from component `source` to component `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaArrow {
    /// Block ids in the component partition of the graph the meta-arrow was taken from.
    pub source_component: usize,
    pub target_component: usize,
    pub source: VertexSet,
    pub target: VertexSet,
    /// Sorted `(i, j)` pairs, `i` in `source`, `j` in `target`.
    pub arrows: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EssentialGraph {
    pub graph: HybridGraph,
    /// Mergings in the order they were applied.
    pub provenance: Vec<MetaArrow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueSeparatorData {
    /// Maximal cliques in a running-intersection order.
    pub cliques: Vec<VertexSet>,
    /// Separator multiplicities `ν(S)`.
    pub separators: BTreeMap<VertexSet, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoreData {
    pub idle: VertexSet,
    pub core: VertexSet,
}

/// Why two graphs are or are not equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Equivalent,
    SkeletonMismatch,
    ImmoralityMismatch,
}

pub fn compare(g: &HybridGraph, h: &HybridGraph) -> Result<Comparison> {
    require_nf(g)?;
    require_nf(h)?;
    if g.m() != h.m() {
        return Err(Error::VertexCountMismatch(g.m(), h.m()));
    }
    Ok(if skeleton(g) != skeleton(h) {
        Comparison::SkeletonMismatch
    } else if immoralities(g) != immoralities(h) {
        Comparison::ImmoralityMismatch
    } else {
        Comparison::Equivalent
    })
}

/// Same skeleton and same immoralities.
pub fn equivalent(g: &HybridGraph, h: &HybridGraph) -> Result<bool> {
    Ok(compare(g, h)? == Comparison::Equivalent)
}

/// Every meta-arrow of `h`, sorted by (min source vertex, min target vertex).
pub fn meta_arrows(h: &HybridGraph) -> Vec<MetaArrow> {
    let parts = components(h);
    let mut grouped: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for (i, j) in h.arrows() {
        let key = (parts.component_index[i], parts.component_index[j]);
        grouped.entry(key).or_default().push((i, j));
    }
    // block ids are ordered by min vertex, so key order is the documented order
    grouped
        .into_iter()
        .map(|((s, t), arrows)| MetaArrow {
            source_component: s,
            target_component: t,
            source: parts.blocks[s],
            target: parts.blocks[t],
            arrows,
        })
        .collect()
}

fn is_legal(h: &HybridGraph, ma: &MetaArrow) -> bool {
    let pa_target = h.parents_of_set(ma.target);
    let pa_source = h.parents_of_set(ma.source);
    h.is_clique(pa_target.intersection(ma.source)) && pa_target.difference(ma.source) == pa_source
}

/// Meta-arrows `T ⇒ T'` with `p(T') ∩ T` a clique and `p(T') \ T = p(T)`.
pub fn legal_mergings(h: &HybridGraph) -> Result<Vec<MetaArrow>> {
    require_nf(h)?;
    Ok(meta_arrows(h).into_iter().filter(|ma| is_legal(h, ma)).collect())
}

/// Replaces every arrow of `ma` by an undirected edge. Legality is not checked.
pub fn merge(h: &HybridGraph, ma: &MetaArrow) -> Result<HybridGraph> {
    let parts = components(h);
    let source_ok = parts.blocks.contains(&ma.source) && parts.blocks.contains(&ma.target);
    if !source_ok || ma.arrows.is_empty() {
        return Err(Error::NotMetaArrow);
    }
    let actual: Vec<(usize, usize)> = h
        .arrows()
        .into_iter()
        .filter(|&(i, j)| ma.source.contains(i) && ma.target.contains(j))
        .collect();
    if actual != ma.arrows {
        return Err(Error::NotMetaArrow);
    }
    let mut out = h.clone();
    for &(i, j) in &ma.arrows {
        out.remove_link(i, j);
        out.add_edge(i, j).expect("link was just removed");
    }
    Ok(out)
}

/// Greedily applies the first legal merging until none remains.
pub fn essential_graph(h: &HybridGraph) -> Result<EssentialGraph> {
    require_nf(h)?;
    let mut graph = h.clone();
    let mut provenance = Vec::new();
    // each merging turns at least one arrow into an undirected edge
    while let Some(ma) = meta_arrows(&graph).into_iter().find(|ma| is_legal(&graph, ma)) {
        graph = merge(&graph, &ma)?;
        provenance.push(ma);
    }
    Ok(EssentialGraph { graph, provenance })
}

/// Like [`essential_graph`] but picks a random legal merging at every step.
/// Used to check that the fixpoint does not depend on the merging order.
pub fn essential_graph_random_order(h: &HybridGraph, seed: u64) -> Result<HybridGraph> {
    require_nf(h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graph = h.clone();
    loop {
        let legal: Vec<MetaArrow> = meta_arrows(&graph)
            .into_iter()
            .filter(|ma| is_legal(&graph, ma))
            .collect();
        let Some(ma) = legal.choose(&mut rng) else {
            return Ok(graph);
        };
        graph = merge(&graph, ma)?;
    }
}

/// The unique maximal idle set and its complement.
///
/// A member of an idle set is linked to every other vertex and every vertex
/// that is not its parent (its children and neighbours) must be idle too, so
/// the idle set is the largest subset of fully-linked vertices closed under
/// children and neighbours.
pub fn idle_core(h: &HybridGraph) -> Result<CoreData> {
    require_chain(h)?;
    let all = h.vertices();
    let mut idle: VertexSet = (0..h.m()).filter(|&v| h.adjacent(v) == all.without(v)).collect();
    loop {
        let bad: VertexSet = idle
            .iter()
            .filter(|&v| !h.children(v).union(h.neighbors(v)).is_subset(idle))
            .collect();
        if bad.is_empty() {
            break;
        }
        idle = idle.difference(bad);
    }
    Ok(CoreData {
        idle,
        core: all.difference(idle),
    })
}

/// Maximal cliques and separators of an undirected decomposable graph.
pub fn cliques_and_separators(u: &HybridGraph) -> Result<CliqueSeparatorData> {
    if u.num_arrows() > 0 {
        return Err(Error::NotUndirected);
    }
    cliques_and_separators_within(u, u.vertices())
}

/// [`cliques_and_separators`] on the undirected part of `h` induced by `within`.
pub fn cliques_and_separators_within(h: &HybridGraph, within: VertexSet) -> Result<CliqueSeparatorData> {
    clique_data(h, within, |candidates| candidates[0])
}

/// [`cliques_and_separators`] with seeded random tie-breaking in the
/// maximum-cardinality search.
pub fn cliques_and_separators_seeded(u: &HybridGraph, seed: u64) -> Result<CliqueSeparatorData> {
    if u.num_arrows() > 0 {
        return Err(Error::NotUndirected);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    clique_data(u, u.vertices(), |candidates| {
        *candidates.choose(&mut rng).expect("non-empty")
    })
}

fn clique_data(
    h: &HybridGraph,
    within: VertexSet,
    mut pick: impl FnMut(&[usize]) -> usize,
) -> Result<CliqueSeparatorData> {
    let nb = |v: usize| h.neighbors(v).intersection(within);

    // maximum cardinality search
    let mut weight = vec![0usize; h.m()];
    let mut visited = VertexSet::EMPTY;
    let mut order = Vec::with_capacity(within.len());
    while visited != within {
        let remaining = within.difference(visited);
        let best = remaining.iter().map(|v| weight[v]).max().expect("non-empty");
        let candidates: Vec<usize> = remaining.iter().filter(|&v| weight[v] == best).collect();
        let v = pick(&candidates);
        visited.insert(v);
        order.push(v);
        for w in nb(v).difference(visited) {
            weight[w] += 1;
        }
    }

    // each vertex with its earlier-visited neighbours must form a clique
    let mut earlier = VertexSet::EMPTY;
    let mut candidate_cliques = Vec::with_capacity(order.len());
    for &v in &order {
        let back = nb(v).intersection(earlier);
        if !is_undirected_clique(h, back) {
            return Err(Error::NotDecomposable(
                find_chordless_cycle(h, within).unwrap_or_default(),
            ));
        }
        candidate_cliques.push(back.with(v));
        earlier.insert(v);
    }

    let cliques: Vec<VertexSet> = candidate_cliques
        .iter()
        .enumerate()
        .filter(|&(k, &c)| {
            !candidate_cliques
                .iter()
                .enumerate()
                .any(|(l, &d)| l != k && c.is_subset(d) && (c != d || l < k))
        })
        .map(|(_, &c)| c)
        .collect();

    let mut separators = BTreeMap::new();
    let mut seen = VertexSet::EMPTY;
    for (k, &c) in cliques.iter().enumerate() {
        if k > 0 {
            *separators.entry(c.intersection(seen)).or_insert(0) += 1;
        }
        seen = seen.union(c);
    }
    Ok(CliqueSeparatorData { cliques, separators })
}

fn is_undirected_clique(h: &HybridGraph, a: VertexSet) -> bool {
    a.iter().all(|v| a.without(v).is_subset(h.neighbors(v)))
}

/// A chordless cycle of length ≥ 4 in the undirected part induced by
/// `within`, if one exists. Vertices are 0-based, in cycle order.
pub fn find_chordless_cycle(h: &HybridGraph, within: VertexSet) -> Option<Vec<usize>> {
    let nb = |v: usize| h.neighbors(v).intersection(within);
    for v in within {
        let nv: Vec<usize> = nb(v).iter().collect();
        for (a, &x) in nv.iter().enumerate() {
            for &y in &nv[a + 1..] {
                if h.has_edge(x, y) {
                    continue;
                }
                // shortest x..y path avoiding v and its other neighbours
                let allowed = within.difference(nb(v).with(v)).with(x).with(y);
                if let Some(path) = shortest_path(h, allowed, x, y) {
                    let mut cycle = vec![v];
                    cycle.extend(path);
                    return Some(cycle);
                }
            }
        }
    }
    None
}

fn shortest_path(h: &HybridGraph, allowed: VertexSet, from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; h.m()];
    let mut seen = VertexSet::singleton(from);
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for w in h.neighbors(v).intersection(allowed).difference(seen) {
            seen.insert(w);
            prev[w] = v;
            queue.push_back(w);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;

    fn g(text: &str) -> HybridGraph {
        parse_graph(text).unwrap()
    }

    const CHAIN: &str = "vertices: 3\n1 -> 2\n2 -> 3\n";
    const CHAIN_B: &str = "vertices: 3\n2 -> 1\n2 -> 3\n";
    const COLLIDER: &str = "vertices: 3\n1 -> 2\n3 -> 2\n";
    const SPRINKLE: &str = "vertices: 5\n1 -> 2\n1 -> 3\n2 -> 4\n3 -> 4\n4 -> 5\n";

    #[test]
    fn equivalence_examples() {
        assert!(equivalent(&g(CHAIN), &g(CHAIN_B)).unwrap());
        assert!(!equivalent(&g(CHAIN), &g(COLLIDER)).unwrap());
        assert!(equivalent(&g(SPRINKLE), &g(SPRINKLE)).unwrap());
        assert_eq!(
            compare(&g(CHAIN), &g(COLLIDER)).unwrap(),
            Comparison::ImmoralityMismatch
        );
        assert_eq!(
            compare(&g(CHAIN), &g("vertices: 3\n1 -> 2\n1 -> 3\n")).unwrap(),
            Comparison::SkeletonMismatch
        );
    }

    #[test]
    fn equivalence_rejects_flags_and_size_mismatch() {
        let flag = g("vertices: 3\n1 -> 2\n2 -- 3\n");
        assert!(matches!(equivalent(&flag, &flag), Err(Error::NotNfChainGraph(_))));
        assert!(matches!(
            equivalent(&g(CHAIN), &g("vertices: 4\n")),
            Err(Error::VertexCountMismatch(3, 4))
        ));
    }

    #[test]
    fn legal_mergings_of_small_graphs() {
        let legal = legal_mergings(&g(CHAIN)).unwrap();
        // {2} => {3} fails condition (b): p({3}) \ {2} is empty but p({2}) = {1}
        assert_eq!(legal.len(), 1);
        assert_eq!(legal[0].source, VertexSet::from_labels(&[1]));
        assert_eq!(legal[0].target, VertexSet::from_labels(&[2]));
        assert!(legal_mergings(&g(COLLIDER)).unwrap().is_empty());
        assert!(legal_mergings(&g("vertices: 3\n1 -- 2\n2 -- 3\n")).unwrap().is_empty());
    }

    #[test]
    fn merge_replaces_arrows() {
        let h = g(CHAIN);
        let mas = meta_arrows(&h);
        assert_eq!(merge(&h, &mas[0]).unwrap(), g("vertices: 3\n1 -- 2\n2 -> 3\n"));
        assert_eq!(merge(&h, &mas[1]).unwrap(), g("vertices: 3\n1 -> 2\n2 -- 3\n"));

        // merge does not check legality
        let s = g(SPRINKLE);
        let last = meta_arrows(&s).pop().unwrap();
        assert_eq!(last.arrows, vec![(3, 4)]);
        assert!(merge(&s, &last).is_ok());
    }

    #[test]
    fn merge_rejects_foreign_meta_arrow() {
        let h = g(CHAIN);
        let bogus = MetaArrow {
            source_component: 0,
            target_component: 2,
            source: VertexSet::from_labels(&[1]),
            target: VertexSet::from_labels(&[3]),
            arrows: vec![(0, 2)],
        };
        assert_eq!(merge(&h, &bogus), Err(Error::NotMetaArrow));
    }

    #[test]
    fn essential_graph_examples() {
        assert_eq!(
            essential_graph(&g(CHAIN)).unwrap().graph,
            g("vertices: 3\n1 -- 2\n2 -- 3\n")
        );
        let c = essential_graph(&g(COLLIDER)).unwrap();
        assert_eq!(c.graph, g(COLLIDER));
        assert!(c.provenance.is_empty());
        assert_eq!(
            essential_graph(&g(SPRINKLE)).unwrap().graph,
            g("vertices: 5\n1 -- 2\n1 -- 3\n2 -> 4\n3 -> 4\n4 -> 5\n")
        );
    }

    #[test]
    fn idle_sets() {
        let c = idle_core(&g(COLLIDER)).unwrap();
        assert_eq!(c.idle, VertexSet::from_labels(&[2]));
        assert_eq!(c.core, VertexSet::from_labels(&[1, 3]));
        let c = idle_core(&g("vertices: 3\n1 -- 2\n2 -- 3\n")).unwrap();
        assert!(c.idle.is_empty());
        let c = idle_core(&g("vertices: 3\n1 -> 2\n1 -> 3\n2 -> 3\n")).unwrap();
        assert_eq!(c.idle, VertexSet::full(3));
        assert!(c.core.is_empty());
        assert!(idle_core(&g("vertices: 3\n1 -> 2\n2 -> 3\n3 -> 1\n")).is_err());
    }

    #[test]
    fn idle_set_matches_subset_enumeration() {
        // brute force over all subsets for a handful of small graphs
        let graphs = [
            COLLIDER,
            CHAIN,
            SPRINKLE,
            "vertices: 4\n1 -> 3\n2 -> 3\n1 -> 4\n2 -> 4\n3 -- 4\n1 -- 2\n",
            "vertices: 4\n1 -> 3\n2 -> 3\n1 -> 4\n2 -> 4\n3 -- 4\n",
            "vertices: 4\n1 -> 2\n1 -> 3\n1 -> 4\n2 -- 3\n3 -- 4\n2 -- 4\n",
        ];
        for text in graphs {
            let h = g(text);
            let m = h.m();
            let all = h.vertices();
            let mut best = VertexSet::EMPTY;
            for bits in 0..(1u64 << m) {
                let b = VertexSet::from_bits(bits);
                let linked = h.is_clique(b);
                let dominated = all.difference(b).iter().all(|i| b.iter().all(|j| h.has_arrow(i, j)));
                if linked && dominated && b.len() > best.len() {
                    best = b;
                }
            }
            assert_eq!(idle_core(&h).unwrap().idle, best, "{text}");
        }
    }

    #[test]
    fn cliques_of_small_graphs() {
        let d = cliques_and_separators(&g("vertices: 3\n1 -- 2\n2 -- 3\n")).unwrap();
        assert_eq!(
            d.cliques,
            vec![VertexSet::from_labels(&[1, 2]), VertexSet::from_labels(&[2, 3])]
        );
        assert_eq!(d.separators, BTreeMap::from([(VertexSet::from_labels(&[2]), 1)]));

        let d = cliques_and_separators(&g("vertices: 3\n1 -- 2\n2 -- 3\n1 -- 3\n")).unwrap();
        assert_eq!(d.cliques, vec![VertexSet::full(3)]);
        assert!(d.separators.is_empty());

        let err = cliques_and_separators(&g("vertices: 4\n1 -- 2\n2 -- 3\n3 -- 4\n4 -- 1\n")).unwrap_err();
        let Error::NotDecomposable(cycle) = err else {
            panic!("expected NotDecomposable")
        };
        assert_eq!(cycle.len(), 4);

        assert_eq!(cliques_and_separators(&g(CHAIN)), Err(Error::NotUndirected));
    }

    #[test]
    fn chordless_cycle_is_reported_in_order() {
        let h = g("vertices: 6\n1 -- 2\n2 -- 3\n3 -- 4\n4 -- 5\n5 -- 1\n1 -- 6\n6 -- 2\n");
        let cycle = find_chordless_cycle(&h, h.vertices()).unwrap();
        assert!(cycle.len() >= 4);
        for k in 0..cycle.len() {
            let (a, b) = (cycle[k], cycle[(k + 1) % cycle.len()]);
            assert!(h.has_edge(a, b));
        }
        assert!(find_chordless_cycle(&g("vertices: 3\n1 -- 2\n2 -- 3\n"), VertexSet::full(3)).is_none());
    }
}
