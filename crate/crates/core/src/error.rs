use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("momentum is not null: |k.k| = {residual:e}")]
    NotNull { residual: f64 },
    #[error("momentum pair violates p^2 = 2 k.p: residual {residual:e}")]
    OffVariety { residual: f64 },
    #[error("solver did not converge after {iterations} iterations (residual {residual:e}, contraction {contraction:.3})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        contraction: f64,
    },
    #[error("boundary system is singular or ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("p = {0:?} lies too close to the excluded line through the orientation vector")]
    DegenerateFrame([f64; 3]),
    #[error("potential has no radial profile; the radial forward route is unavailable")]
    NotRadial,
    #[error("container format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
