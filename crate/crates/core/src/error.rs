use thiserror::Error;

/// Errors produced by the engine. Mathematical check failures are reported
/// through report structures, not through this type; `Error` is reserved for
/// contract violations (bad input, mismatched carriers, exceeded budgets).
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("generator tables do not match")]
    TableMismatch,

    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("not in the image of the total derivative: {0}")]
    NotInImage(String),

    #[error("not a variational derivative (Helmholtz condition fails)")]
    NotVariational,

    #[error("weight budget exceeded: needed {needed}, cutoff {cutoff}")]
    Cutoff { needed: String, cutoff: String },

    #[error("size limit exceeded: {0}")]
    Limit(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("cochain is not weight homogeneous")]
    NotHomogeneous,

    #[error("unsupported carrier: {0}")]
    Unsupported(String),

    #[error("Lenard step obstruction: {0}")]
    Obstruction(String),

    #[error("sign convention violation (internal inconsistency): {0}")]
    Convention(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("coefficient mode mismatch: {0}")]
    CoefficientMode(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
