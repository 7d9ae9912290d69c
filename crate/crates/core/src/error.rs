use thiserror::Error;

use crate::graph::{NodeId, ValidationReport};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(ValidationReport),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("matrix is not unit upper-triangular in its declared order")]
    NotTriangular,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("pivot {pivot:e} at node {node} is numerically zero")]
    SingularPivot { node: NodeId, pivot: f64 },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("block {0} is singular")]
    SingularBlock(String),
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("conditional probability of node {node} is {value} at levels {assignment:?}")]
    InvalidProbability {
        node: NodeId,
        value: f64,
        assignment: Vec<i8>,
    },
    #[error("not realizable: {0}")]
    NotRealizable(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}
