use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input matrix is not square: {rows} rows but row {row} has {cols} columns")]
    NotSquare { rows: usize, row: usize, cols: usize },

    #[error("asymmetric entry at pair ({i},{j}): |{a} - {b}| exceeds tolerance {tol}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64, tol: f64 },

    #[error("negative entry {value} at pair ({i},{j})")]
    NegativeEntry { i: usize, j: usize, value: f64 },

    #[error("nonzero diagonal entry {value} at index {i} exceeds tolerance {tol}")]
    NonzeroDiagonal { i: usize, value: f64, tol: f64 },

    #[error("point-count mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("n={n} exceeds the enumeration cap {cap}; raise the cap explicitly (PERTURBLAB_MAX_N or with_cap) to proceed")]
    EnumerationCap { n: usize, cap: usize },

    #[error("invalid cluster count k={k} for n={n}")]
    InvalidK { k: usize, n: usize },

    #[error("invalid clustering labels: {reason}")]
    InvalidClustering { reason: String },

    #[error("invalid perturbation spec: {reason}")]
    InvalidSpec { reason: String },

    #[error("search budget must be positive")]
    ZeroBudget,

    #[error("multiplicative chain requires matching zero patterns; pair ({i},{j}) has {a} vs {b}")]
    ZeroPatternMismatch { i: usize, j: usize, a: f64, b: f64 },

    #[error("inconsistent bound inputs: {reason}")]
    BoundInputs { reason: String },

    #[error("infeasible construction: {reason}")]
    Infeasible { reason: String },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
