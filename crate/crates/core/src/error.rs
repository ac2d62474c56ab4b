use thiserror::Error;

use crate::sdp::SdpStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("matrix is not Hermitian (max deviation {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    Indefinite { min_eigenvalue: f64 },

    #[error("invalid SDP problem: {0}")]
    InvalidProblem(String),

    #[error("SDP solver stopped with status {status:?} after {iterations} iterations (gap {gap:.3e})")]
    Solver {
        status: SdpStatus,
        iterations: usize,
        gap: f64,
    },

    #[error("witness does not match the requested factorization: {0}")]
    Witness(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
