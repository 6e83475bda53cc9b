//! Markov equivalence, symmetry groups and vanishing minors for Gaussian
//! chain-graph models without flags.
//!
//! Vertices are 0-based in the API and 1-based in every text format.

pub mod cli;
pub mod cupflow;
pub mod equivalence;
pub mod error;
pub mod generate;
pub mod graph;
pub mod imset;
pub mod numeric;
pub mod permutation;
pub mod polynomial;
pub mod symmetry;
pub mod vertex_set;

pub use error::{Error, Result};
pub use graph::{parse_graph, GraphClass, HybridGraph};
pub use permutation::Permutation;
pub use vertex_set::VertexSet;
