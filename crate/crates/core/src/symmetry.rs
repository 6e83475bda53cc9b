//! The largest linear group leaving a chain-graph model invariant.
//!
//! The identity component `G⁰` consists of the invertible matrices whose
//! `(i, j)` entry may be nonzero only when `N*(i) ⊆ N*(j)` in the essential
//! graph. The full group is `ℓ(Aut(H̃*, c)) ⋉ G⁰`, where `H̃*` is the quotient
//! of the essential graph by `i ~ j ⇔ N*(i) = N*(j)`, coloured by class size,
//! and `ℓ` lifts a class permutation by sending the k-th smallest member of a
//! class to the k-th smallest member of its image.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde_json::{json, Value};

use crate::equivalence::essential_graph;
use crate::error::{Error, Result};
use crate::graph::{closed_neighborhoods, is_dag, require_nf, HybridGraph};
use crate::imset::nstar_containment_via_imset;
use crate::vertex_set::VertexSet;

pub use crate::permutation::Permutation;

/// Above this many colour-preserving automorphisms only a generating set is
/// returned.
pub const FULL_LIST_LIMIT: usize = 10_000;

/// Allowed support of `G⁰`: `allowed(i, j)` iff `N*(i) ⊆ N*(j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroPattern {
    m: usize,
    /// `rows[i]` = `{ j : allowed(i, j) }`, which is also `↓i`.
    rows: Vec<VertexSet>,
}

impl ZeroPattern {
    pub fn from_rows(rows: Vec<VertexSet>) -> Self {
        ZeroPattern { m: rows.len(), rows }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_allowed(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    pub fn row(&self, i: usize) -> VertexSet {
        self.rows[i]
    }

    /// Allowed off-diagonal positions, sorted lexicographically.
    pub fn off_diagonal(&self) -> Vec<(usize, usize)> {
        (0..self.m)
            .flat_map(|i| self.rows[i].without(i).iter().map(move |j| (i, j)))
            .collect()
    }

    /// `allowed(i, j) ∧ allowed(j, k) ⇒ allowed(i, k)`.
    pub fn is_transitive(&self) -> bool {
        (0..self.m).all(|i| self.rows[i].iter().all(|j| self.rows[j].is_subset(self.rows[i])))
    }
}

/// `H̃*` with its colouring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    /// Classes ordered by smallest member.
    pub classes: Vec<VertexSet>,
    pub class_of: Vec<usize>,
    /// Class-level arrows `(a, b)`.
    pub arrows: BTreeSet<(usize, usize)>,
    /// Class-level undirected edges `(a, b)`, `a < b`.
    pub edges: BTreeSet<(usize, usize)>,
    /// Class sizes.
    pub colors: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Link {
    None,
    Out,
    In,
    Undirected,
}

impl QuotientGraph {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn m(&self) -> usize {
        self.class_of.len()
    }

    fn link(&self, a: usize, b: usize) -> Link {
        if self.arrows.contains(&(a, b)) {
            Link::Out
        } else if self.arrows.contains(&(b, a)) {
            Link::In
        } else if self.edges.contains(&(a.min(b), a.max(b))) {
            Link::Undirected
        } else {
            Link::None
        }
    }

    /// Lifts a class permutation (`tau[a]` = image class) to the vertices.
    pub fn lift(&self, tau: &[usize]) -> Permutation {
        let mut images = vec![0; self.m()];
        for (a, &b) in tau.iter().enumerate() {
            for (v, w) in self.classes[a].iter().zip(self.classes[b].iter()) {
                images[v] = w;
            }
        }
        Permutation::new(images).expect("lift of a colour-preserving bijection")
    }
}

/// Closed neighbourhoods `N*(i)` in the essential graph.
pub fn nstar_sets(h: &HybridGraph) -> Result<Vec<VertexSet>> {
    Ok(closed_neighborhoods(&essential_graph(h)?.graph))
}

fn pattern_from_nstar(nstar: &[VertexSet]) -> ZeroPattern {
    let rows = nstar
        .iter()
        .map(|&ni| (0..nstar.len()).filter(|&j| ni.is_subset(nstar[j])).collect())
        .collect();
    ZeroPattern::from_rows(rows)
}

/// `G⁰` pattern via the essential graph.
pub fn g0_pattern_via_essential(h: &HybridGraph) -> Result<ZeroPattern> {
    Ok(pattern_from_nstar(&nstar_sets(h)?))
}

/// `G⁰` pattern. DAGs go through the imset support, other graphs through the
/// essential graph.
pub fn g0_pattern(h: &HybridGraph) -> Result<ZeroPattern> {
    require_nf(h)?;
    if !is_dag(h) {
        return g0_pattern_via_essential(h);
    }
    let rel = nstar_containment_via_imset(h)?;
    let mut rows: Vec<VertexSet> = (0..h.m()).map(VertexSet::singleton).collect();
    for &(i, j) in &rel.pairs {
        rows[i].insert(j);
    }
    Ok(ZeroPattern::from_rows(rows))
}

fn quotient_from_essential(hstar: &HybridGraph) -> QuotientGraph {
    let nstar = closed_neighborhoods(hstar);
    let m = hstar.m();
    let mut class_of = vec![usize::MAX; m];
    let mut classes: Vec<VertexSet> = Vec::new();
    for v in 0..m {
        if class_of[v] != usize::MAX {
            continue;
        }
        let class: VertexSet = (v..m).filter(|&w| nstar[w] == nstar[v]).collect();
        for w in class {
            class_of[w] = classes.len();
        }
        classes.push(class);
    }
    let mut arrows = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for (i, j) in hstar.arrows() {
        arrows.insert((class_of[i], class_of[j]));
    }
    for (i, j) in hstar.undirected_edges() {
        let (a, b) = (class_of[i], class_of[j]);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let colors = classes.iter().map(|c| c.len()).collect();
    QuotientGraph {
        classes,
        class_of,
        arrows,
        edges,
        colors,
    }
}

/// Classes of `~` and the coloured quotient of the essential graph.
pub fn equivalence_classes(h: &HybridGraph) -> Result<QuotientGraph> {
    Ok(quotient_from_essential(&essential_graph(h)?.graph))
}

/// Colour-preserving automorphisms of the quotient, lifted to `[m]`.
///
/// Returns `(automorphisms, complete)`. When the group has at most
/// [`FULL_LIST_LIMIT`] elements the list is the whole group (identity first);
/// otherwise it is a generating set taken from a stabiliser chain.
pub fn colored_automorphisms(q: &QuotientGraph) -> (Vec<Permutation>, bool) {
    let search = AutSearch::new(q);
    let mut all = Vec::new();
    let mut tau = vec![usize::MAX; q.len()];
    let mut used = vec![false; q.len()];
    if search.enumerate(0, &mut tau, &mut used, &mut all, FULL_LIST_LIMIT + 1) {
        all.sort_by_key(|t| t.iter().enumerate().any(|(a, &b)| a != b));
        return (all.iter().map(|t| q.lift(t)).collect(), true);
    }
    let mut gens = vec![Permutation::identity(q.m())];
    gens.extend(search.generators().iter().map(|t| q.lift(t)));
    (gens, false)
}

struct AutSearch<'a> {
    q: &'a QuotientGraph,
    signature: Vec<(usize, usize, usize, usize)>,
}

impl<'a> AutSearch<'a> {
    fn new(q: &'a QuotientGraph) -> Self {
        let k = q.len();
        let mut signature: Vec<(usize, usize, usize, usize)> = q.colors.iter().map(|&c| (c, 0, 0, 0)).collect();
        for &(a, b) in &q.arrows {
            signature[a].1 += 1;
            signature[b].2 += 1;
        }
        for &(a, b) in &q.edges {
            signature[a].3 += 1;
            signature[b].3 += 1;
        }
        debug_assert_eq!(signature.len(), k);
        AutSearch { q, signature }
    }

    fn compatible(&self, a: usize, b: usize, tau: &[usize]) -> bool {
        self.signature[a] == self.signature[b] && (0..a).all(|c| self.q.link(a, c) == self.q.link(b, tau[c]))
    }

    /// Collects complete assignments; returns false once `cap` is reached.
    fn enumerate(
        &self,
        a: usize,
        tau: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        if a == tau.len() {
            out.push(tau.clone());
            return out.len() < cap;
        }
        for b in 0..tau.len() {
            if used[b] || !self.compatible(a, b, tau) {
                continue;
            }
            tau[a] = b;
            used[b] = true;
            let go_on = self.enumerate(a + 1, tau, used, out, cap);
            used[b] = false;
            tau[a] = usize::MAX;
            if !go_on {
                return false;
            }
        }
        true
    }

    /// First automorphism extending `tau[..a]`, if any.
    fn extend(&self, a: usize, tau: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        if a == tau.len() {
            return true;
        }
        if tau[a] != usize::MAX {
            // pre-assigned
            return self.compatible(a, tau[a], tau) && self.extend(a + 1, tau, used);
        }
        for b in 0..tau.len() {
            if used[b] || !self.compatible(a, b, tau) {
                continue;
            }
            tau[a] = b;
            used[b] = true;
            if self.extend(a + 1, tau, used) {
                return true;
            }
            used[b] = false;
            tau[a] = usize::MAX;
        }
        false
    }

    /// Transversal generators of the pointwise stabiliser chain.
    fn generators(&self) -> Vec<Vec<usize>> {
        let k = self.q.len();
        let mut gens: Vec<Vec<usize>> = Vec::new();
        for level in 0..k {
            let mut orbit = BTreeSet::from([level]);
            let mut level_gens: Vec<Vec<usize>> = Vec::new();
            for b in level + 1..k {
                if orbit.contains(&b) || self.signature[b] != self.signature[level] {
                    continue;
                }
                let mut tau = vec![usize::MAX; k];
                let mut used = vec![false; k];
                for c in 0..level {
                    tau[c] = c;
                    used[c] = true;
                }
                tau[level] = b;
                used[b] = true;
                if self.extend(0, &mut tau, &mut used) {
                    level_gens.push(tau);
                    orbit = orbit_of(level, &level_gens);
                }
            }
            gens.extend(level_gens);
        }
        gens
    }
}

fn orbit_of(point: usize, gens: &[Vec<usize>]) -> BTreeSet<usize> {
    let mut orbit = BTreeSet::from([point]);
    let mut stack = vec![point];
    while let Some(p) = stack.pop() {
        for g in gens {
            if orbit.insert(g[p]) {
                stack.push(g[p]);
            }
        }
    }
    orbit
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupDescription {
    pub pattern: ZeroPattern,
    pub quotient: QuotientGraph,
    /// Lifted colour-preserving automorphisms; identity first.
    pub lifted_automorphisms: Vec<Permutation>,
    /// Whether `lifted_automorphisms` is the whole of `ℓ(Aut(H̃*, c))`
    /// rather than a generating set.
    pub automorphisms_complete: bool,
    /// `↓i = { j : N*(i) ⊆ N*(j) }`.
    pub down_sets: Vec<VertexSet>,
}

impl GroupDescription {
    pub fn min_sample_size(&self) -> usize {
        self.down_sets.iter().map(|d| d.len()).max().unwrap_or(0)
    }

    /// Machine-readable rendering with 1-based labels.
    pub fn to_json(&self) -> Value {
        let pattern: Vec<[usize; 2]> = self
            .pattern
            .off_diagonal()
            .iter()
            .map(|&(i, j)| [i + 1, j + 1])
            .collect();
        let classes: Vec<Vec<usize>> = self.quotient.classes.iter().map(|c| c.labels()).collect();
        let automorphisms: Vec<Vec<usize>> = self.lifted_automorphisms.iter().map(|p| p.labels()).collect();
        let down_sets: Vec<Vec<usize>> = self.down_sets.iter().map(|d| d.labels()).collect();
        json!({
            "pattern": pattern,
            "classes": classes,
            "automorphisms": automorphisms,
            "min_sample_size": self.min_sample_size(),
            "down_sets": down_sets,
        })
    }
}

impl fmt::Display for GroupDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs = self.pattern.off_diagonal();
        if pairs.is_empty() {
            writeln!(f, "allowed: none")?;
        } else {
            let rendered: Vec<String> = pairs.iter().map(|&(i, j)| format!("({},{})", i + 1, j + 1)).collect();
            writeln!(f, "allowed: {}", rendered.join(" "))?;
        }
        let classes: Vec<String> = self.quotient.classes.iter().map(|c| c.to_string()).collect();
        writeln!(f, "classes: {}", classes.join(" "))?;
        let label = if self.automorphisms_complete {
            "automorphisms"
        } else {
            "automorphism_generators"
        };
        let perms: Vec<String> = self.lifted_automorphisms.iter().map(|p| p.to_string()).collect();
        writeln!(f, "{label}: {}", perms.join(" "))?;
        let downs: Vec<String> = self
            .down_sets
            .iter()
            .enumerate()
            .map(|(i, d)| format!("{}:{}", i + 1, d))
            .collect();
        writeln!(f, "down_sets: {}", downs.join(" "))?;
        writeln!(f, "min_sample_size: {}", self.min_sample_size())
    }
}

pub fn group_description(h: &HybridGraph) -> Result<GroupDescription> {
    let pattern = g0_pattern(h)?;
    let hstar = essential_graph(h)?.graph;
    let quotient = quotient_from_essential(&hstar);
    let (lifted_automorphisms, automorphisms_complete) = colored_automorphisms(&quotient);
    let down_sets = pattern_from_nstar(&closed_neighborhoods(&hstar)).rows;
    Ok(GroupDescription {
        pattern,
        quotient,
        lifted_automorphisms,
        automorphisms_complete,
        down_sets,
    })
}

/// `max_i |↓i|`.
pub fn min_sample_size(h: &HybridGraph) -> Result<usize> {
    let downs = g0_pattern_via_essential_checked(h)?;
    Ok(downs.rows.iter().map(|d| d.len()).max().unwrap_or(0))
}

fn g0_pattern_via_essential_checked(h: &HybridGraph) -> Result<ZeroPattern> {
    require_nf(h)?;
    g0_pattern_via_essential(h)
}

/// `⌈(n − max_i|↓i| + 1)/2⌉ / n`, an upper bound on the finite-sample
/// breakdown point of any equivariant covariance estimator.
pub fn breakdown_bound(h: &HybridGraph, n: usize) -> Result<Ratio<u64>> {
    let min = min_sample_size(h)?;
    if n < min || n == 0 {
        return Err(Error::SampleTooSmall { n, min: min.max(1) });
    }
    let numerator = (n - min + 1).div_ceil(2);
    Ok(Ratio::new(numerator as u64, n as u64))
}
