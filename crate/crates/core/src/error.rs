use thiserror::Error;

use crate::ncrank::RankCertificate;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable count mismatch: {0} vs {1}")]
    VarCountMismatch(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("entry ({row}, {col}) has degree {degree}; a linear matrix needs degree <= 1")]
    NotLinear { row: usize, col: usize, degree: usize },

    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("evaluation point lies outside the domain (node {node})")]
    Domain { node: usize },

    #[error("rank testers disagree: {0}")]
    Inconsistent(String),

    #[error("invalid certificate: {0}")]
    CertificateInvalid(String),

    #[error("pencil is not selfadjoint")]
    NotSelfadjoint,

    #[error("quantum operator is not semi-flat (c = {0:e})")]
    NotSemiFlat(f64),

    #[error("expression is not regular: its linearization is not full (inner rank {})", .0.rho)]
    NotRegular(Box<RankCertificate>),

    #[error("cannot invert the zero function")]
    DivisionByZeroFunction,

    #[error("monic reduction failed: {0}")]
    NotReducible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
