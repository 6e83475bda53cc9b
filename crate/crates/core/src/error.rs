use thiserror::Error;

use crate::graph::GraphClass;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: vertex {vertex} out of range 1..{m}")]
    VertexOutOfRange { line: usize, vertex: usize, m: usize },

    #[error("line {line}: loop at vertex {vertex}")]
    Loop { line: usize, vertex: usize },

    #[error("line {line}: duplicate link between {a} and {b}")]
    DuplicateLink { line: usize, a: usize, b: usize },

    #[error("line {line}: conflicting link between {a} and {b}")]
    ConflictingLink { line: usize, a: usize, b: usize },

    #[error("{m} vertices exceeds the supported maximum of {max}")]
    TooManyVertices { m: usize, max: usize },

    #[error("graph is not a chain graph without flags (classified as {0})")]
    NotNfChainGraph(GraphClass),

    #[error("graph is not a chain graph (classified as {0})")]
    NotChainGraph(GraphClass),

    #[error("graph is not a DAG (classified as {0})")]
    NotDag(GraphClass),

    #[error("graph has directed edges; an undirected graph is required")]
    NotUndirected,

    #[error("graphs have different vertex counts ({0} vs {1})")]
    VertexCountMismatch(usize, usize),

    #[error("arrow set is not a meta-arrow of the graph")]
    NotMetaArrow,

    #[error("graph is not decomposable: chordless cycle {0:?}")]
    NotDecomposable(Vec<usize>),

    #[error("row and column sets differ in size ({rows} vs {cols})")]
    SizeMismatch { rows: usize, cols: usize },

    #[error("symbolic expansion limited to m <= {max_m} and minors of size <= {max_d} (got m = {m}, size {d})")]
    TooLarge {
        m: usize,
        d: usize,
        max_m: usize,
        max_d: usize,
    },

    #[error("sample size {n} is below the minimum {min}")]
    SampleTooSmall { n: usize, min: usize },

    #[error("data restricted to rows {0} is rank deficient")]
    RankDeficientData(String),

    #[error("matrix is singular or ill-conditioned")]
    SingularMatrix,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("permutation is not a bijection of 1..{0}")]
    InvalidPermutation(usize),
}

impl Error {
    /// True for errors meaning "valid input, wrong kind of graph".
    pub fn is_domain_error(&self) -> bool {
        matches!(
            self,
            Error::NotNfChainGraph(_)
                | Error::NotChainGraph(_)
                | Error::NotDag(_)
                | Error::NotUndirected
                | Error::NotDecomposable(_)
                | Error::NotMetaArrow
                | Error::SampleTooSmall { .. }
                | Error::RankDeficientData(_)
                | Error::SingularMatrix
        )
    }
}
