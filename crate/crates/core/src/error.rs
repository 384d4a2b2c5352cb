use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },

    #[error("unknown identifier `{name}`")]
    UnknownIdentifier { name: String },

    /// Numerical domain violation (log of non-positive value, division by
    /// zero, ...) attributed to the sub-expression that produced it.
    #[error("domain error in `{expr}`: {message}")]
    Domain { expr: String, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate metric at (u1, u2) = ({u1}, {u2}): sqrt(g) = {sqrt_g:.3e}")]
    DegenerateMetric { u1: f64, u2: f64, sqrt_g: f64 },

    #[error("degenerate metric at grid node ({i}, {j})")]
    DegenerateNode { i: usize, j: usize },

    /// The normal-coordinate chart hit a focal caustic: the volume ratio
    /// gamma dropped to (or below) the safety cutoff 0.1.
    #[error("focal caustic: gamma = {gamma:.3e} <= 0.1 at u3 = {u3}")]
    Caustic { gamma: f64, u3: f64 },

    #[error("operator is not weighted-Hermitian: residual {residual:.3e}")]
    NonHermitian { residual: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("{0}")]
    Invalid(String),

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
