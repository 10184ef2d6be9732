use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid jump kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("occupation law {family} cannot realize mean {mean} with variance {variance}")]
    Unrealizable {
        family: &'static str,
        mean: f64,
        variance: f64,
    },

    #[error("site {site} outside window [{lo}, {hi}]")]
    OutOfWindow { site: i64, lo: i64, hi: i64 },

    #[error("query too close to the particle window edge: {0}")]
    WindowEdge(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("time grid mismatch: expected {expected} entries, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: estimated error {achieved:e} > tolerance {tolerance:e}")]
    Quadrature { achieved: f64, tolerance: f64 },

    #[error("covariance factorization failed: min eigenvalue {min_eig:e} below budget {budget:e}")]
    Factorization { min_eig: f64, budget: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("poisson field too small: need space coordinate up to {needed}, field covers {covered}")]
    InsufficientField { needed: f64, covered: f64 },

    #[error("variational infimum attained at window boundary label {label}; widen the label window")]
    WindowBoundary { label: i64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
