use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("quadrature did not converge: estimate {estimate}, bound {bound:.3e} at {nodes} nodes")]
    Quadrature { estimate: f64, bound: f64, nodes: usize },
    #[error("state is not a valid density matrix: {0}")]
    InvalidState(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("analysis failed: {0}")]
    Analysis(String),
    #[error("lanczos did not converge after {0} iterations")]
    Lanczos(usize),
}
