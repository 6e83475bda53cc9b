//! Standard imsets of DAGs.
//!
//! The standard imset of a DAG is the integer function on vertex subsets
//! `δ_[m] − δ_∅ + Σ_i (δ_pa(i) − δ_pa(i)∪{i})`. Two DAGs are Markov equivalent
//! iff their imsets agree, and the support of the imset is enough to read off
//! the `N*(i) ⊆ N*(j)` relation of the essential graph without building it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::equivalence::{cliques_and_separators_within, idle_core, CoreData};
use crate::error::Result;
use crate::graph::{components, require_dag, require_nf, HybridGraph};
use crate::permutation::Permutation;
use crate::vertex_set::VertexSet;

/// Finite integer-valued map on vertex subsets; zero entries are never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Imset {
    entries: BTreeMap<VertexSet, i64>,
}

impl Imset {
    pub fn new() -> Self {
        Imset::default()
    }

    /// Adds `value · δ_set`.
    pub fn add(&mut self, set: VertexSet, value: i64) {
        if value == 0 {
            return;
        }
        let e = self.entries.entry(set).or_insert(0);
        *e += value;
        if *e == 0 {
            self.entries.remove(&set);
        }
    }

    pub fn get(&self, set: VertexSet) -> i64 {
        self.entries.get(&set).copied().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = VertexSet> + '_ {
        self.entries.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (VertexSet, i64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Builds an imset from `(1-based labels, value)` pairs.
    pub fn from_labeled(pairs: &[(&[usize], i64)]) -> Self {
        let mut u = Imset::new();
        for &(labels, v) in pairs {
            u.add(VertexSet::from_labels(labels), v);
        }
        u
    }

    /// `σ(u)(S) = u(σ⁻¹(S))`.
    pub fn permuted(&self, sigma: &Permutation) -> Imset {
        let mut out = Imset::new();
        for (s, v) in self.entries() {
            out.add(sigma.apply_set(s), v);
        }
        out
    }
}

/// One line per entry, `{i,j}: v`, sorted by set size then bit key.
impl fmt::Display for Imset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<VertexSet> = self.entries.keys().copied().collect();
        keys.sort_by_key(|s| (s.len(), s.bits()));
        for s in keys {
            writeln!(f, "{}: {}", s, self.entries[&s])?;
        }
        Ok(())
    }
}

impl fmt::Debug for Imset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

/// Ordered pairs `(i, j)`, `i ≠ j` linked, with `N*(i) ⊆ N*(j)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContainmentRelation {
    pub pairs: BTreeSet<(usize, usize)>,
}

impl ContainmentRelation {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i, j))
    }
}

pub fn standard_imset(h: &HybridGraph) -> Result<Imset> {
    require_dag(h)?;
    let mut u = Imset::new();
    u.add(h.vertices(), 1);
    u.add(VertexSet::EMPTY, -1);
    for i in 0..h.m() {
        let pa = h.parents(i);
        u.add(pa, 1);
        u.add(pa.with(i), -1);
    }
    Ok(u)
}

pub fn equivalent_via_imset(g: &HybridGraph, h: &HybridGraph) -> Result<bool> {
    Ok(g.m() == h.m() && standard_imset(g)? == standard_imset(h)?)
}

/// `N*`-containment for linked pairs of a DAG, read from the imset support
/// alone: `(i, j)` holds iff every support set containing `i` contains `j`.
pub fn nstar_containment_via_imset(h: &HybridGraph) -> Result<ContainmentRelation> {
    let u = standard_imset(h)?;
    let support: Vec<VertexSet> = u.support().collect();
    // E_i as a bit vector over support indices
    let words = support.len().div_ceil(64).max(1);
    let mut occurs = vec![vec![0u64; words]; h.m()];
    for (k, s) in support.iter().enumerate() {
        for i in s.iter() {
            occurs[i][k / 64] |= 1 << (k % 64);
        }
    }
    let subset = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x & !y == 0);
    let mut pairs = BTreeSet::new();
    for i in 0..h.m() {
        for j in h.adjacent(i) {
            if subset(&occurs[i], &occurs[j]) {
                pairs.insert((i, j));
            }
        }
    }
    Ok(ContainmentRelation { pairs })
}

/// Evaluates the imset directly from an essential graph whose class contains
/// a DAG, using core components, their cliques, separators and parent sets.
pub fn imset_from_essential(hstar: &HybridGraph) -> Result<Imset> {
    require_nf(hstar)?;
    let CoreData { core, .. } = idle_core(hstar)?;
    let mut u = Imset::new();
    if core.is_empty() {
        return Ok(u);
    }
    u.add(core, 1);
    let parts = components(hstar);
    let mut initial = 0i64;
    for &t in parts.blocks.iter().filter(|t| t.is_subset(core)) {
        let pa = hstar.parents_of_set(t);
        let data = cliques_and_separators_within(hstar, t)?;
        for c in data.cliques {
            u.add(c.union(pa), -1);
        }
        for (s, nu) in data.separators {
            u.add(s.union(pa), nu as i64);
        }
        if pa.is_empty() {
            initial += 1;
        } else {
            u.add(pa, 1);
        }
    }
    u.add(VertexSet::EMPTY, initial - 1);
    Ok(u)
}

/// `σ(u) = u`.
pub fn permutation_fixes_imset(u: &Imset, sigma: &Permutation) -> bool {
    u.entries().all(|(s, v)| u.get(sigma.apply_set(s)) == v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;

    fn g(text: &str) -> HybridGraph {
        parse_graph(text).unwrap()
    }

    const CHAINS: [&str; 3] = [
        "vertices: 3\n1 -> 2\n2 -> 3\n",
        "vertices: 3\n2 -> 1\n2 -> 3\n",
        "vertices: 3\n2 -> 1\n3 -> 2\n",
    ];
    const COLLIDER: &str = "vertices: 3\n1 -> 2\n3 -> 2\n";
    const SPRINKLE: &str = "vertices: 5\n1 -> 2\n1 -> 3\n2 -> 4\n3 -> 4\n4 -> 5\n";

    fn chain_imset() -> Imset {
        Imset::from_labeled(&[(&[1, 2, 3], 1), (&[1, 2], -1), (&[2, 3], -1), (&[2], 1)])
    }

    #[test]
    fn chain_imsets_match_figure() {
        for text in CHAINS {
            assert_eq!(standard_imset(&g(text)).unwrap(), chain_imset());
        }
    }

    #[test]
    fn collider_and_complete_imsets() {
        let expected = Imset::from_labeled(&[(&[], 1), (&[1], -1), (&[3], -1), (&[1, 3], 1)]);
        assert_eq!(standard_imset(&g(COLLIDER)).unwrap(), expected);
        assert!(standard_imset(&g("vertices: 2\n1 -> 2\n")).unwrap().is_empty());
        assert!(standard_imset(&g("vertices: 2\n1 -- 2\n")).is_err());
    }

    #[test]
    fn rendering() {
        assert_eq!(chain_imset().to_string(), "{2}: 1\n{1,2}: -1\n{2,3}: -1\n{1,2,3}: 1\n");
        let c = standard_imset(&g(COLLIDER)).unwrap();
        assert_eq!(c.to_string(), "{}: 1\n{1}: -1\n{3}: -1\n{1,3}: 1\n");
    }

    #[test]
    fn imset_equivalence() {
        for a in CHAINS {
            for b in CHAINS {
                assert!(equivalent_via_imset(&g(a), &g(b)).unwrap());
            }
        }
        assert!(!equivalent_via_imset(&g(CHAINS[0]), &g(COLLIDER)).unwrap());
        assert!(equivalent_via_imset(&g(SPRINKLE), &g(SPRINKLE)).unwrap());
    }

    #[test]
    fn containment_examples() {
        let rel = nstar_containment_via_imset(&g(CHAINS[0])).unwrap();
        assert_eq!(rel.pairs, BTreeSet::from([(0, 1), (2, 1)]));
        let rel = nstar_containment_via_imset(&g(COLLIDER)).unwrap();
        assert_eq!(rel.pairs, BTreeSet::from([(1, 0), (1, 2)]));
        let rel = nstar_containment_via_imset(&g(SPRINKLE)).unwrap();
        assert_eq!(rel.pairs, BTreeSet::from([(4, 3)]));
    }

    #[test]
    fn imset_from_essential_examples() {
        let path = g("vertices: 3\n1 -- 2\n2 -- 3\n");
        assert_eq!(imset_from_essential(&path).unwrap(), chain_imset());
        let c = g(COLLIDER);
        assert_eq!(imset_from_essential(&c).unwrap(), standard_imset(&c).unwrap());
        let complete = g("vertices: 3\n1 -- 2\n2 -- 3\n1 -- 3\n");
        assert!(imset_from_essential(&complete).unwrap().is_empty());
        let sprinkle_ess = g("vertices: 5\n1 -- 2\n1 -- 3\n2 -> 4\n3 -> 4\n4 -> 5\n");
        assert_eq!(
            imset_from_essential(&sprinkle_ess).unwrap(),
            standard_imset(&g(SPRINKLE)).unwrap()
        );
    }

    #[test]
    fn permutations_fixing_imsets() {
        let swap13 = Permutation::transposition(3, 0, 2);
        let swap12 = Permutation::transposition(3, 0, 1);
        assert!(permutation_fixes_imset(&standard_imset(&g(COLLIDER)).unwrap(), &swap13));
        assert!(permutation_fixes_imset(&chain_imset(), &swap13));
        assert!(!permutation_fixes_imset(&chain_imset(), &swap12));
        assert!(permutation_fixes_imset(&Imset::new(), &swap12));
    }

    #[test]
    fn permuted_matches_definition() {
        let u = standard_imset(&g(SPRINKLE)).unwrap();
        let sigma = Permutation::from_labels(&[2, 3, 1, 5, 4]).unwrap();
        let su = u.permuted(&sigma);
        let inv = sigma.inverse();
        for bits in 0..32u64 {
            let s = VertexSet::from_bits(bits);
            assert_eq!(su.get(s), u.get(inv.apply_set(s)));
        }
    }
}
