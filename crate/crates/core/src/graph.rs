//! Hybrid graphs: parsing, classification and neighbourhood queries.
//!
//! A [`HybridGraph`] on `m` vertices stores, per vertex, its parents, children
//! and undirected neighbours as bit sets. Vertices are 0-based in the API and
//! 1-based in the text format:
//!
//! ```text
//! # comment
//! vertices: 3
//! 1 -> 2
//! 2 -- 3
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::vertex_set::{VertexSet, MAX_VERTICES};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HybridGraph {
    m: usize,
    parents: Vec<VertexSet>,
    children: Vec<VertexSet>,
    neighbors: Vec<VertexSet>,
}

/// Most specific class of a hybrid graph. A graph without edges is reported
/// as `Undirected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphClass {
    Undirected,
    Dag,
    NfChainGraph,
    ChainGraphWithFlags,
    NotChainGraph,
}

impl GraphClass {
    pub fn is_chain_graph(self) -> bool {
        !matches!(self, GraphClass::NotChainGraph)
    }

    pub fn is_nf_chain_graph(self) -> bool {
        matches!(
            self,
            GraphClass::Undirected | GraphClass::Dag | GraphClass::NfChainGraph
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GraphClass::Undirected => "undirected",
            GraphClass::Dag => "dag",
            GraphClass::NfChainGraph => "nf-chain-graph",
            GraphClass::ChainGraphWithFlags => "chain-graph-with-flags",
            GraphClass::NotChainGraph => "not-chain-graph",
        }
    }
}

impl fmt::Display for GraphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Components: maximal sets connected by undirected edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    /// Blocks ordered by their smallest vertex.
    pub blocks: Vec<VertexSet>,
    /// `component_index[v]` is the block containing `v`.
    pub component_index: Vec<usize>,
}

impl ComponentPartition {
    pub fn block_of(&self, v: usize) -> VertexSet {
        self.blocks[self.component_index[v]]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighborhood {
    pub parents: VertexSet,
    pub children: VertexSet,
    pub neighbors: VertexSet,
    /// `{i} ∪ neighbors ∪ children`
    pub closed: VertexSet,
}

impl HybridGraph {
    /// Empty graph on `m` vertices.
    ///
    /// Panics if `m` exceeds [`MAX_VERTICES`]; use [`parse_graph`] for
    /// untrusted input.
    pub fn new(m: usize) -> Self {
        assert!(m <= MAX_VERTICES, "at most {MAX_VERTICES} vertices are supported");
        HybridGraph {
            m,
            parents: vec![VertexSet::EMPTY; m],
            children: vec![VertexSet::EMPTY; m],
            neighbors: vec![VertexSet::EMPTY; m],
        }
    }

    /// Builds a graph from 1-based arrow and undirected-edge lists.
    pub fn from_labels(m: usize, arrows: &[(usize, usize)], edges: &[(usize, usize)]) -> Result<Self> {
        if m > MAX_VERTICES {
            return Err(Error::TooManyVertices { m, max: MAX_VERTICES });
        }
        let mut g = HybridGraph::new(m);
        for &(a, b) in arrows {
            g.insert_link(0, a, b, true)?;
        }
        for &(a, b) in edges {
            g.insert_link(0, a, b, false)?;
        }
        Ok(g)
    }

    /// Adds `i -> j` (0-based).
    pub fn add_arrow(&mut self, i: usize, j: usize) -> Result<()> {
        self.insert_link(0, i + 1, j + 1, true)
    }

    /// Adds `i -- j` (0-based).
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        self.insert_link(0, i + 1, j + 1, false)
    }

    fn insert_link(&mut self, line: usize, a: usize, b: usize, directed: bool) -> Result<()> {
        for v in [a, b] {
            if v == 0 || v > self.m {
                return Err(Error::VertexOutOfRange {
                    line,
                    vertex: v,
                    m: self.m,
                });
            }
        }
        if a == b {
            return Err(Error::Loop { line, vertex: a });
        }
        let (i, j) = (a - 1, b - 1);
        let same = if directed {
            self.has_arrow(i, j)
        } else {
            self.has_edge(i, j)
        };
        if same {
            return Err(Error::DuplicateLink { line, a, b });
        }
        if self.is_linked(i, j) {
            return Err(Error::ConflictingLink { line, a, b });
        }
        if directed {
            self.children[i].insert(j);
            self.parents[j].insert(i);
        } else {
            self.neighbors[i].insert(j);
            self.neighbors[j].insert(i);
        }
        Ok(())
    }

    /// Removes any link between `i` and `j`.
    pub fn remove_link(&mut self, i: usize, j: usize) {
        self.children[i].remove(j);
        self.children[j].remove(i);
        self.parents[i].remove(j);
        self.parents[j].remove(i);
        self.neighbors[i].remove(j);
        self.neighbors[j].remove(i);
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.m)
    }

    pub fn parents(&self, i: usize) -> VertexSet {
        self.parents[i]
    }

    pub fn children(&self, i: usize) -> VertexSet {
        self.children[i]
    }

    pub fn neighbors(&self, i: usize) -> VertexSet {
        self.neighbors[i]
    }

    /// All vertices linked to `i`.
    pub fn adjacent(&self, i: usize) -> VertexSet {
        self.parents[i].union(self.children[i]).union(self.neighbors[i])
    }

    pub fn has_arrow(&self, i: usize, j: usize) -> bool {
        self.children[i].contains(j)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].contains(j)
    }

    pub fn is_linked(&self, i: usize, j: usize) -> bool {
        self.adjacent(i).contains(j)
    }

    /// `p_H(A)`: vertices with an arrow into some member of `a`.
    pub fn parents_of_set(&self, a: VertexSet) -> VertexSet {
        a.iter().fold(VertexSet::EMPTY, |acc, v| acc.union(self.parents[v]))
    }

    /// All pairs in `a` linked.
    pub fn is_clique(&self, a: VertexSet) -> bool {
        a.iter().all(|v| a.without(v).is_subset(self.adjacent(v)))
    }

    /// Arrows `(i, j)` sorted lexicographically.
    pub fn arrows(&self) -> Vec<(usize, usize)> {
        (0..self.m)
            .flat_map(|i| self.children[i].iter().map(move |j| (i, j)))
            .collect()
    }

    /// Undirected edges `(i, j)` with `i < j`, sorted.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        (0..self.m)
            .flat_map(|i| self.neighbors[i].iter().filter(move |&j| j > i).map(move |j| (i, j)))
            .collect()
    }

    pub fn num_arrows(&self) -> usize {
        self.children.iter().map(|c| c.len()).sum()
    }

    pub fn num_undirected_edges(&self) -> usize {
        self.neighbors.iter().map(|n| n.len()).sum::<usize>() / 2
    }

    /// Vertices reachable from `from` along arrows only, excluding the start
    /// vertices themselves unless reached again.
    pub fn directed_descendants(&self, from: VertexSet) -> VertexSet {
        let mut seen = VertexSet::EMPTY;
        let mut frontier: Vec<usize> = from.iter().collect();
        while let Some(v) = frontier.pop() {
            for c in self.children[v] {
                if !seen.contains(c) {
                    seen.insert(c);
                    frontier.push(c);
                }
            }
        }
        seen
    }

    /// Applies `images` (0-based, `v ↦ images[v]`) to every vertex.
    pub fn relabel(&self, images: &[usize]) -> HybridGraph {
        let mut g = HybridGraph::new(self.m);
        for (i, j) in self.arrows() {
            g.children[images[i]].insert(images[j]);
            g.parents[images[j]].insert(images[i]);
        }
        for (i, j) in self.undirected_edges() {
            g.neighbors[images[i]].insert(images[j]);
            g.neighbors[images[j]].insert(images[i]);
        }
        g
    }

    /// Serializes in the graph file format.
    pub fn serialize(&self) -> String {
        let mut out = format!("vertices: {}\n", self.m);
        for (i, j) in self.arrows() {
            out.push_str(&format!("{} -> {}\n", i + 1, j + 1));
        }
        for (i, j) in self.undirected_edges() {
            out.push_str(&format!("{} -- {}\n", i + 1, j + 1));
        }
        out
    }
}

impl fmt::Display for HybridGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl fmt::Debug for HybridGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HybridGraph(m={};", self.m)?;
        for (i, j) in self.arrows() {
            write!(f, " {}->{}", i + 1, j + 1)?;
        }
        for (i, j) in self.undirected_edges() {
            write!(f, " {}--{}", i + 1, j + 1)?;
        }
        f.write_str(")")
    }
}

impl FromStr for HybridGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_graph(s)
    }
}

/// Parses the graph file format.
pub fn parse_graph(text: &str) -> Result<HybridGraph> {
    let mut graph: Option<HybridGraph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some(g) = graph.as_mut() else {
            graph = Some(parse_header(trimmed, line)?);
            continue;
        };
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let [a, op, b] = tokens[..] else {
            return Err(Error::Syntax {
                line,
                message: format!("expected `<i> -> <j>` or `<i> -- <j>`, found `{trimmed}`"),
            });
        };
        let directed = match op {
            "->" => true,
            "--" => false,
            other => {
                return Err(Error::Syntax {
                    line,
                    message: format!("unknown link `{other}`"),
                });
            }
        };
        let a = parse_vertex(a, line)?;
        let b = parse_vertex(b, line)?;
        g.insert_link(line, a, b, directed)?;
    }
    graph.ok_or(Error::Syntax {
        line: 0,
        message: "missing `vertices: <m>` header".into(),
    })
}

fn parse_header(line_text: &str, line: usize) -> Result<HybridGraph> {
    let rest = line_text.strip_prefix("vertices:").ok_or_else(|| Error::Syntax {
        line,
        message: format!("expected `vertices: <m>`, found `{line_text}`"),
    })?;
    let m: usize = rest.trim().parse().map_err(|_| Error::Syntax {
        line,
        message: format!("invalid vertex count `{}`", rest.trim()),
    })?;
    if m > MAX_VERTICES {
        return Err(Error::TooManyVertices { m, max: MAX_VERTICES });
    }
    Ok(HybridGraph::new(m))
}

fn parse_vertex(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::Syntax {
        line,
        message: format!("invalid vertex `{tok}`"),
    })
}

/// Components, blocks ordered by smallest vertex.
pub fn components(h: &HybridGraph) -> ComponentPartition {
    let m = h.m();
    let mut component_index = vec![usize::MAX; m];
    let mut blocks = Vec::new();
    for start in 0..m {
        if component_index[start] != usize::MAX {
            continue;
        }
        let id = blocks.len();
        let mut block = VertexSet::singleton(start);
        let mut stack = vec![start];
        component_index[start] = id;
        while let Some(v) = stack.pop() {
            for w in h.neighbors(v) {
                if component_index[w] == usize::MAX {
                    component_index[w] = id;
                    block.insert(w);
                    stack.push(w);
                }
            }
        }
        blocks.push(block);
    }
    ComponentPartition {
        blocks,
        component_index,
    }
}

/// Topological order of the component digraph (Kahn, smallest-min-vertex
/// first). `None` if an arrow lies inside a component or the component
/// digraph has a cycle.
pub fn component_order(h: &HybridGraph, parts: &ComponentPartition) -> Option<Vec<usize>> {
    let k = parts.len();
    let mut succ = vec![BTreeSet::new(); k];
    let mut indeg = vec![0usize; k];
    for (i, j) in h.arrows() {
        let (a, b) = (parts.component_index[i], parts.component_index[j]);
        if a == b {
            return None;
        }
        if succ[a].insert(b) {
            indeg[b] += 1;
        }
    }
    // block ids are already sorted by min vertex, so the smallest id is the
    // smallest min vertex
    let mut ready: BTreeSet<usize> = (0..k).filter(|&b| indeg[b] == 0).collect();
    let mut order = Vec::with_capacity(k);
    while let Some(b) = ready.pop_first() {
        order.push(b);
        for &c in &succ[b] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.insert(c);
            }
        }
    }
    (order.len() == k).then_some(order)
}

pub fn classify(h: &HybridGraph) -> GraphClass {
    let parts = components(h);
    if component_order(h, &parts).is_none() {
        return GraphClass::NotChainGraph;
    }
    let has_flag = h
        .arrows()
        .into_iter()
        .any(|(i, j)| h.neighbors(j).iter().any(|k| !h.is_linked(i, k)));
    if has_flag {
        GraphClass::ChainGraphWithFlags
    } else if h.num_arrows() == 0 {
        GraphClass::Undirected
    } else if h.num_undirected_edges() == 0 {
        GraphClass::Dag
    } else {
        GraphClass::NfChainGraph
    }
}

/// Acyclic and without undirected edges (an edgeless graph qualifies).
pub fn is_dag(h: &HybridGraph) -> bool {
    h.num_undirected_edges() == 0 && classify(h).is_chain_graph()
}

pub(crate) fn require_nf(h: &HybridGraph) -> Result<()> {
    let class = classify(h);
    if class.is_nf_chain_graph() {
        Ok(())
    } else {
        Err(Error::NotNfChainGraph(class))
    }
}

pub(crate) fn require_chain(h: &HybridGraph) -> Result<()> {
    let class = classify(h);
    if class.is_chain_graph() {
        Ok(())
    } else {
        Err(Error::NotChainGraph(class))
    }
}

pub(crate) fn require_dag(h: &HybridGraph) -> Result<()> {
    if is_dag(h) {
        Ok(())
    } else {
        Err(Error::NotDag(classify(h)))
    }
}

pub fn neighborhoods(h: &HybridGraph, i: usize) -> Neighborhood {
    let (parents, children, neighbors) = (h.parents(i), h.children(i), h.neighbors(i));
    Neighborhood {
        parents,
        children,
        neighbors,
        closed: neighbors.union(children).with(i),
    }
}

/// `N_H(i) = {i} ∪ n(i) ∪ c(i)` for every vertex.
pub fn closed_neighborhoods(h: &HybridGraph) -> Vec<VertexSet> {
    (0..h.m()).map(|i| neighborhoods(h, i).closed).collect()
}

pub fn skeleton(h: &HybridGraph) -> HybridGraph {
    let mut s = HybridGraph::new(h.m());
    for i in 0..h.m() {
        s.neighbors[i] = h.adjacent(i);
    }
    s
}

/// Immoralities `i -> j <- k` with `i`, `k` unlinked, as `(min, j, max)`.
pub fn immoralities(h: &HybridGraph) -> BTreeSet<(usize, usize, usize)> {
    let mut out = BTreeSet::new();
    for j in 0..h.m() {
        let pa: Vec<usize> = h.parents(j).iter().collect();
        for (x, &i) in pa.iter().enumerate() {
            for &k in &pa[x + 1..] {
                if !h.is_linked(i, k) {
                    out.insert((i, j, k));
                }
            }
        }
    }
    out
}
