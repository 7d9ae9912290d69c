//! Graphical Markov models over regression graphs.
//!
//! The crate covers parent graphs, regression graphs with joint response
//! blocks and a context block, and the two undirected special cases. Induced
//! graphs and independence statements come from a binary edge-matrix calculus
//! (partial closure); Gaussian parameters come from the matching real-matrix
//! calculus (partial inversion). Exact symmetric binary distributions and
//! naive path enumerators serve as oracles for the structural results.

pub mod binary;
pub mod edge;
pub mod error;
pub mod gaussian;
pub mod graph;
pub mod independence;
pub mod io;
pub mod oracle;

pub use edge::{EdgeMatrix, InducedEdgeSet};
pub use error::{Error, Result};
pub use graph::{node_set, BlockStructure, Edge, EdgeKind, NodeId, NodeSet, RegressionGraph, VClass, VKind};
pub use independence::IndepQuery;
