use thiserror::Error;

/// Errors raised by the geometry, averaging and equilibrium routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "orbit crossing: minimum separation {separation:.3e} is below threshold {threshold:.1e}"
    )]
    OrbitCrossing { separation: f64, threshold: f64 },

    #[error(
        "quadrature did not converge within {nodes} nodes per axis (last change {change:.3e})"
    )]
    NonConverged { nodes: usize, change: f64 },

    #[error("singular point: {0}")]
    Singular(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
