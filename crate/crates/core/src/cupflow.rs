//! Vanishing minors of concentration matrices via cup systems.
//!
//! A cup `(i, j, k, l)` is a walk that optionally follows an arrow `i -> j`,
//! optionally an undirected edge `j -- k`, and optionally an arrow backwards
//! `l -> k`. `det K[A, B]` vanishes identically on the model exactly when no
//! self-avoiding system of cups joins `A` to `B`, which is a vertex-disjoint
//! paths question on a four-layer digraph.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::graph::{require_chain, require_nf, HybridGraph};
use crate::polynomial::{Monomial, MonomialPolynomial, Variable};
use crate::vertex_set::VertexSet;

/// Largest graph accepted by [`expand_subdeterminant`].
pub const SYMBOLIC_MAX_M: usize = 6;
/// Largest minor accepted by [`expand_subdeterminant`].
pub const SYMBOLIC_MAX_D: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cup {
    pub entries: [usize; 4],
}

impl Cup {
    pub fn start(&self) -> usize {
        self.entries[0]
    }

    pub fn end(&self) -> usize {
        self.entries[3]
    }

    pub fn is_valid_in(&self, h: &HybridGraph) -> bool {
        let [i, j, k, l] = self.entries;
        (i == j || h.has_arrow(i, j)) && (j == k || h.has_edge(j, k)) && (k == l || h.has_arrow(l, k))
    }

    /// `(I−Λ)_ij · Ω_jk · (I−Λ)_lk` as a signed monomial.
    pub fn weight(&self) -> MonomialPolynomial {
        let [i, j, k, l] = self.entries;
        let mut w = MonomialPolynomial::var(Variable::omega(j, k));
        if i != j {
            w = &w * &(-&MonomialPolynomial::var(Variable::Lambda(i, j)));
        }
        if k != l {
            w = &w * &(-&MonomialPolynomial::var(Variable::Lambda(l, k)));
        }
        w
    }
}

impl fmt::Display for Cup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [i, j, k, l] = self.entries;
        write!(f, "({},{},{},{})", i + 1, j + 1, k + 1, l + 1)
    }
}

/// Four copies of the vertex set. `steps[s][v]` lists the successors of `v`
/// in layer `s` within layer `s + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CupLayerGraph {
    pub m: usize,
    pub steps: [Vec<VertexSet>; 3],
    pub sources: VertexSet,
    pub sinks: VertexSet,
}

impl CupLayerGraph {
    pub fn has_edge(&self, step: usize, from: usize, to: usize) -> bool {
        self.steps[step][from].contains(to)
    }

    /// True if `path` is a walk through the four layers.
    pub fn contains_path(&self, path: [usize; 4]) -> bool {
        (0..3).all(|s| self.has_edge(s, path[s], path[s + 1]))
    }

    /// All cups starting at `a` and ending in `targets`.
    pub fn cups_from(&self, a: usize, targets: VertexSet) -> Vec<Cup> {
        let mut out = Vec::new();
        for j in self.steps[0][a] {
            for k in self.steps[1][j] {
                for l in self.steps[2][k].intersection(targets) {
                    out.push(Cup { entries: [a, j, k, l] });
                }
            }
        }
        out
    }
}

fn check_sizes(a: VertexSet, b: VertexSet) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            rows: a.len(),
            cols: b.len(),
        });
    }
    Ok(())
}

pub fn build_layer_graph(h: &HybridGraph, a: VertexSet, b: VertexSet) -> Result<CupLayerGraph> {
    check_sizes(a, b)?;
    require_chain(h)?;
    let m = h.m();
    let step = |f: &dyn Fn(usize) -> VertexSet| (0..m).map(|v| f(v).with(v)).collect::<Vec<_>>();
    Ok(CupLayerGraph {
        m,
        steps: [
            step(&|v| h.children(v)),
            step(&|v| h.neighbors(v)),
            step(&|v| h.parents(v)),
        ],
        sources: a,
        sinks: b,
    })
}

/// Unit-capacity flow network with adjacency lists.
struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u8>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_edge(&mut self, u: usize, v: usize) {
        // edge e and its reverse e ^ 1
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(1);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut via = vec![usize::MAX; self.head.len()];
        let mut queue = VecDeque::from([s]);
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && !seen[v] {
                    seen[v] = true;
                    via[v] = e;
                    queue.push_back(v);
                }
            }
        }
        if !seen[t] {
            return false;
        }
        let mut v = t;
        while v != s {
            let e = via[v];
            self.cap[e] -= 1;
            self.cap[e ^ 1] += 1;
            v = self.to[e ^ 1];
        }
        true
    }

    fn max_flow(&mut self, s: usize, t: usize, limit: usize) -> usize {
        let mut flow = 0;
        while flow < limit && self.augment(s, t) {
            flow += 1;
        }
        flow
    }
}

/// Number of vertex-disjoint layer-respecting paths from sources to sinks.
pub fn disjoint_path_count(lg: &CupLayerGraph) -> usize {
    let m = lg.m;
    // node (layer, v) is split into in = 2 + 2(layer·m + v) and out = in + 1
    let node_in = |layer: usize, v: usize| 2 + 2 * (layer * m + v);
    let (s, t) = (0, 1);
    let mut net = FlowNetwork::new(2 + 8 * m);
    for layer in 0..4 {
        for v in 0..m {
            net.add_edge(node_in(layer, v), node_in(layer, v) + 1);
        }
    }
    for (step, succ) in lg.steps.iter().enumerate() {
        for (v, &next) in succ.iter().enumerate() {
            for w in next {
                net.add_edge(node_in(step, v) + 1, node_in(step + 1, w));
            }
        }
    }
    for a in lg.sources {
        net.add_edge(s, node_in(0, a));
    }
    for b in lg.sinks {
        net.add_edge(node_in(3, b) + 1, t);
    }
    net.max_flow(s, t, lg.sources.len())
}

pub fn has_self_avoiding_cup_system(h: &HybridGraph, a: VertexSet, b: VertexSet) -> Result<bool> {
    let lg = build_layer_graph(h, a, b)?;
    Ok(disjoint_path_count(&lg) == a.len())
}

/// True when `det K[A, B]` is identically zero on the model.
pub fn vanishing_minor(h: &HybridGraph, a: VertexSet, b: VertexSet) -> Result<bool> {
    Ok(!has_self_avoiding_cup_system(h, a, b)?)
}

/// `(D ∪ {u}, D ∪ {v})` where `D` is the set of children of `u` and their
/// descendants, for every `v ∉ D ∪ {u}` not linked to `u`, ordered by `(u, v)`.
pub fn det00_instances(h: &HybridGraph) -> Result<Vec<(VertexSet, VertexSet)>> {
    require_nf(h)?;
    let mut out = Vec::new();
    for u in 0..h.m() {
        let d = h.directed_descendants(VertexSet::singleton(u));
        for v in 0..h.m() {
            if v != u && !d.contains(v) && !h.is_linked(u, v) {
                out.push((d.with(u), d.with(v)));
            }
        }
    }
    Ok(out)
}

/// A self-avoiding cup system together with its sign relative to the
/// ascending labellings of `A` and `B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CupSystem {
    /// One cup per element of `A`, in ascending order of start vertex.
    pub cups: Vec<Cup>,
    pub sign: i8,
}

impl CupSystem {
    pub fn weight(&self) -> MonomialPolynomial {
        self.cups
            .iter()
            .fold(MonomialPolynomial::one(), |acc, c| &acc * &c.weight())
    }

    /// `sgn(U) · w(U)`.
    pub fn signed_weight(&self) -> MonomialPolynomial {
        let w = self.weight();
        if self.sign < 0 {
            -&w
        } else {
            w
        }
    }
}

/// Sign of the permutation given in one-line notation.
fn permutation_sign(images: &[usize]) -> i8 {
    let mut inversions = 0;
    for x in 0..images.len() {
        for y in x + 1..images.len() {
            if images[x] > images[y] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Every self-avoiding cup system from `A` to `B`, by backtracking.
pub fn self_avoiding_cup_systems(h: &HybridGraph, a: VertexSet, b: VertexSet) -> Result<Vec<CupSystem>> {
    let lg = build_layer_graph(h, a, b)?;
    let starts: Vec<usize> = a.iter().collect();
    let ends: Vec<usize> = b.iter().collect();
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(starts.len());
    extend_systems(
        &lg,
        &starts,
        &ends,
        &mut chosen,
        [VertexSet::EMPTY; 2],
        VertexSet::EMPTY,
        &mut out,
    );
    Ok(out)
}

fn extend_systems(
    lg: &CupLayerGraph,
    starts: &[usize],
    ends: &[usize],
    chosen: &mut Vec<Cup>,
    used_mid: [VertexSet; 2],
    used_end: VertexSet,
    out: &mut Vec<CupSystem>,
) {
    let r = chosen.len();
    if r == starts.len() {
        let images: Vec<usize> = chosen
            .iter()
            .map(|c| ends.iter().position(|&e| e == c.end()).expect("end in B"))
            .collect();
        out.push(CupSystem {
            cups: chosen.clone(),
            sign: permutation_sign(&images),
        });
        return;
    }
    for cup in lg.cups_from(starts[r], lg.sinks.difference(used_end)) {
        let [_, j, k, l] = cup.entries;
        if used_mid[0].contains(j) || used_mid[1].contains(k) {
            continue;
        }
        chosen.push(cup);
        extend_systems(
            lg,
            starts,
            ends,
            chosen,
            [used_mid[0].with(j), used_mid[1].with(k)],
            used_end.with(l),
            out,
        );
        chosen.pop();
    }
}

/// `Σ sgn(U) w(U)` over self-avoiding cup systems.
pub fn signed_cup_sum(h: &HybridGraph, a: VertexSet, b: VertexSet) -> Result<MonomialPolynomial> {
    let mut sum = MonomialPolynomial::zero();
    for system in self_avoiding_cup_systems(h, a, b)? {
        sum = &sum + &system.signed_weight();
    }
    Ok(sum)
}

/// True if any two self-avoiding cup systems with the same monomial weight
/// carry the same sign.
pub fn equal_weights_have_equal_signs(systems: &[CupSystem]) -> bool {
    let mut seen: HashMap<Monomial, i8> = HashMap::new();
    for s in systems {
        // weights are ±1 times a monomial; compare the monomial and fold the
        // coefficient sign into the system sign
        let w = s.weight();
        let (mono, coeff) = w
            .terms()
            .next()
            .map(|(m, c)| (m.clone(), c.clone()))
            .expect("nonzero weight");
        let sign = if coeff.is_negative() { -s.sign } else { s.sign };
        if *seen.entry(mono).or_insert(sign) != sign {
            return false;
        }
    }
    true
}

/// Symbolic `K = (I−Λ)Ω(I−Λ)ᵀ` entry `K_ab`.
fn symbolic_entry(h: &HybridGraph, a: usize, b: usize) -> MonomialPolynomial {
    let factor = |x: usize, y: usize| {
        if x == y {
            MonomialPolynomial::one()
        } else {
            -&MonomialPolynomial::var(Variable::Lambda(x, y))
        }
    };
    let mut sum = MonomialPolynomial::zero();
    for j in h.children(a).with(a) {
        for k in h.neighbors(j).with(j) {
            if k == b || h.has_arrow(b, k) {
                let term = &(&factor(a, j) * &MonomialPolynomial::var(Variable::omega(j, k))) * &factor(b, k);
                sum = &sum + &term;
            }
        }
    }
    sum
}

/// Fully expanded `det K[A, B]` with one variable per model parameter.
pub fn expand_subdeterminant(h: &HybridGraph, a: VertexSet, b: VertexSet) -> Result<MonomialPolynomial> {
    check_sizes(a, b)?;
    if h.m() > SYMBOLIC_MAX_M || a.len() > SYMBOLIC_MAX_D {
        return Err(Error::TooLarge {
            m: h.m(),
            d: a.len(),
            max_m: SYMBOLIC_MAX_M,
            max_d: SYMBOLIC_MAX_D,
        });
    }
    let rows: Vec<usize> = a.iter().collect();
    let cols: Vec<usize> = b.iter().collect();
    let entries: Vec<Vec<MonomialPolynomial>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| symbolic_entry(h, r, c)).collect())
        .collect();
    let mut det = MonomialPolynomial::zero();
    for sigma in crate::permutation::Permutation::all(rows.len()) {
        let mut term = MonomialPolynomial::one();
        for (r, &c) in sigma.images().iter().enumerate() {
            term = &term * &entries[r][c];
            if term.is_zero() {
                break;
            }
        }
        if permutation_sign(sigma.images()) < 0 {
            term = -&term;
        }
        det = &det + &term;
    }
    Ok(det)
}

/// Unit monomial helper for tests and callers that build expected values.
pub fn monomial(vars: &[Variable]) -> Monomial {
    vars.iter().fold(Monomial::one(), |acc, &v| acc.mul(&Monomial::var(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;
    use num_bigint::BigInt;
    use num_traits::One;

    fn g(text: &str) -> HybridGraph {
        parse_graph(text).unwrap()
    }

    fn s(labels: &[usize]) -> VertexSet {
        VertexSet::from_labels(labels)
    }

    const CHAIN: &str = "vertices: 3\n1 -> 2\n2 -> 3\n";
    const COLLIDER: &str = "vertices: 3\n1 -> 2\n3 -> 2\n";
    const SPRINKLE: &str = "vertices: 5\n1 -> 2\n1 -> 3\n2 -> 4\n3 -> 4\n4 -> 5\n";

    #[test]
    fn layer_graph_paths() {
        let lg = build_layer_graph(&g(COLLIDER), s(&[1]), s(&[3])).unwrap();
        assert!(lg.contains_path([0, 1, 1, 2]));
        for v in 0..3 {
            assert!(lg.contains_path([v, v, v, v]));
        }
        let chain = g(CHAIN);
        let lg = build_layer_graph(&chain, s(&[1]), s(&[1])).unwrap();
        assert_eq!((lg.sources, lg.sinks), (s(&[1]), s(&[1])));
        // K_11 = w1_1 + l1_2^2 w2_2
        assert_eq!(
            lg.cups_from(0, lg.sinks),
            vec![Cup { entries: [0, 0, 0, 0] }, Cup { entries: [0, 1, 1, 0] }]
        );
        assert!(matches!(
            build_layer_graph(&chain, s(&[1]), s(&[1, 2])),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn collider_minors() {
        let h = g(COLLIDER);
        assert!(!has_self_avoiding_cup_system(&h, s(&[1, 2]), s(&[2, 3])).unwrap());
        assert!(has_self_avoiding_cup_system(&h, s(&[1]), s(&[3])).unwrap());
        assert!(vanishing_minor(&h, s(&[1, 2]), s(&[2, 3])).unwrap());
        assert!(!vanishing_minor(&h, s(&[1, 3]), s(&[1, 3])).unwrap());
        assert!(vanishing_minor(&g(CHAIN), s(&[1]), s(&[3])).unwrap());
    }

    #[test]
    fn det00_examples() {
        let c = det00_instances(&g(COLLIDER)).unwrap();
        assert!(c.contains(&(s(&[1, 2]), s(&[2, 3]))));
        let sp = det00_instances(&g(SPRINKLE)).unwrap();
        assert!(sp.contains(&(s(&[2, 4, 5]), s(&[3, 4, 5]))));
        let complete = g("vertices: 3\n1 -> 2\n1 -> 3\n2 -> 3\n");
        assert!(det00_instances(&complete).unwrap().is_empty());
        for (a, b) in sp {
            assert!(vanishing_minor(&g(SPRINKLE), a, b).unwrap());
        }
    }

    #[test]
    fn symbolic_examples() {
        let h = g(COLLIDER);
        let p = expand_subdeterminant(&h, s(&[1]), s(&[3])).unwrap();
        let expected = MonomialPolynomial::term(
            monomial(&[Variable::Lambda(0, 1), Variable::Lambda(2, 1), Variable::omega(1, 1)]),
            BigInt::one(),
        );
        assert_eq!(p, expected);
        assert!(expand_subdeterminant(&h, s(&[1, 2]), s(&[2, 3])).unwrap().is_zero());
        let d = expand_subdeterminant(&h, s(&[2]), s(&[2])).unwrap();
        assert_eq!(
            d.evaluate(|v| if matches!(v, Variable::Lambda(..)) { 0.0 } else { 1.0 }),
            1.0
        );
        let big = HybridGraph::new(7);
        assert!(matches!(
            expand_subdeterminant(&big, s(&[1]), s(&[2])),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn signed_sum_matches_expansion() {
        let h = g("vertices: 4\n1 -> 2\n3 -> 2\n3 -- 4\n1 -> 4\n");
        for a_bits in 1u64..16 {
            for b_bits in 1u64..16 {
                let (a, b) = (VertexSet::from_bits(a_bits), VertexSet::from_bits(b_bits));
                if a.len() != b.len() || a.len() > 3 {
                    continue;
                }
                let systems = self_avoiding_cup_systems(&h, a, b).unwrap();
                assert!(equal_weights_have_equal_signs(&systems));
                let sum = signed_cup_sum(&h, a, b).unwrap();
                assert_eq!(sum, expand_subdeterminant(&h, a, b).unwrap());
                assert_eq!(sum.is_zero(), vanishing_minor(&h, a, b).unwrap());
            }
        }
    }
}
