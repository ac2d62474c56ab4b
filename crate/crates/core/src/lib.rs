//! Completely bounded norms of Schur multipliers and related bilinear and
//! trilinear forms, computed through small semidefinite programs, together
//! with the norm-optimal factorizations those programs certify.

pub mod duality;
pub mod error;
pub mod factor;
pub mod matrix;
pub mod norms;
pub mod rng;
pub mod sdp;

pub use error::{Error, Result};
pub use factor::{Factorization, Factors, FactorKind};
pub use matrix::{ComplexMatrix, ComplexVector};
pub use norms::{CbConfig, HeuristicConfig, NormCertificate, NormKind};
pub use num_complex::Complex64;
