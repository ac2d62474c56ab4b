//! Deterministic inputs shared by the benchmarks.

use cbnorm::rng::{gaussian_matrix, stream};
use cbnorm::ComplexMatrix;

/// Seed used for every benchmark input.
pub const SEED: u64 = 2024;

/// Complex Gaussian `m x n` matrix, identical across runs.
pub fn random_matrix(m: usize, n: usize) -> ComplexMatrix {
    gaussian_matrix(&mut stream(SEED, (m * 64 + n) as u64), m, n, false)
}

/// Square sizes swept by the SDP benchmarks.
pub const SIZES: [usize; 3] = [2, 4, 8];
