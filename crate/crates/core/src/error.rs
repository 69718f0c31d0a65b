use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("degenerate curve: {0}")]
    Degenerate(String),

    #[error("convexity gate: minimum Gauss curvature {min_k:.6e} over the validation grid is not positive")]
    Convexity { min_k: f64 },

    #[error("curve is not embedded; the enclosed region is undefined")]
    NotEmbedded,

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
