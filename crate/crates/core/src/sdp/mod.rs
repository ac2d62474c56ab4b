//! Small dense semidefinite programming.
//!
//! Problems are stated in primal standard form over a block-diagonal
//! variable `Z = diag(Z_1, ..., Z_p)`, where each block is either a Hermitian
//! PSD matrix or a vector of nonnegative reals:
//!
//! ```text
//! minimize    Re <C, Z>
//! subject to  Re <A_k, Z> = b_k        (equalities)
//!             Re <A_k, Z> <= b_k       (inequalities, slack blocks added internally)
//!             Z >= 0
//! ```
//!
//! with `<A, Z> = Tr(A Z)` for Hermitian `A`. The dual is
//! `maximize b^T y  s.t.  C - sum_k y_k A_k = S >= 0`.

mod eig;
mod ipm;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

pub use eig::{cholesky, herm_eig, min_eigenvalue, psd_factor, psd_factor_with, psd_sqrt, HermEig};

/// One diagonal block of the SDP variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    /// `n x n` Hermitian positive semidefinite matrix.
    Hermitian(usize),
    /// `n` nonnegative reals (a diagonal block).
    Nonneg(usize),
}

impl BlockKind {
    pub fn size(&self) -> usize {
        match *self {
            BlockKind::Hermitian(n) | BlockKind::Nonneg(n) => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: Complex64,
}

/// Sparse Hermitian block-diagonal matrix. Every off-diagonal entry is stored
/// together with its conjugate mirror.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseHerm {
    entries: Vec<Entry>,
}

impl SparseHerm {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `v` at `(i, j)` and `conj(v)` at `(j, i)`. Diagonal entries keep
    /// only the real part of `v`.
    pub fn add(&mut self, block: usize, i: usize, j: usize, v: Complex64) -> &mut Self {
        if i == j {
            self.entries.push(Entry {
                block,
                row: i,
                col: i,
                value: Complex64::new(v.re, 0.0),
            });
        } else {
            self.entries.push(Entry {
                block,
                row: i,
                col: j,
                value: v,
            });
            self.entries.push(Entry {
                block,
                row: j,
                col: i,
                value: v.conj(),
            });
        }
        self
    }

    pub fn add_diag(&mut self, block: usize, i: usize, v: f64) -> &mut Self {
        self.add(block, i, i, Complex64::new(v, 0.0))
    }

    /// Matrix `A` with `Re <A, Z> = Re Z_ij` (`i != j`).
    pub fn real_part(block: usize, i: usize, j: usize) -> Self {
        let mut a = Self::new();
        a.add(block, i, j, Complex64::new(0.5, 0.0));
        a
    }

    /// Matrix `A` with `Re <A, Z> = Im Z_ij` (`i != j`).
    pub fn imag_part(block: usize, i: usize, j: usize) -> Self {
        let mut a = Self::new();
        a.add(block, i, j, Complex64::new(0.0, 0.5));
        a
    }

    pub fn diag(block: usize, i: usize, v: f64) -> Self {
        let mut a = Self::new();
        a.add_diag(block, i, v);
        a
    }

    /// Embeds a dense Hermitian matrix as block `block`.
    pub fn from_dense(block: usize, m: &ComplexMatrix) -> Self {
        let mut a = Self::new();
        for i in 0..m.rows() {
            for j in i..m.cols() {
                let v = m[(i, j)];
                if v.norm() > 0.0 {
                    a.add(block, i, j, v);
                }
            }
        }
        a
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub(crate) fn fro_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.value.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Value of one block of a block-diagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockValue {
    Dense(ComplexMatrix),
    Diag(Vec<f64>),
}

impl BlockValue {
    pub fn as_dense(&self) -> Option<&ComplexMatrix> {
        match self {
            BlockValue::Dense(m) => Some(m),
            BlockValue::Diag(_) => None,
        }
    }

    pub fn as_diag(&self) -> Option<&[f64]> {
        match self {
            BlockValue::Diag(d) => Some(d),
            BlockValue::Dense(_) => None,
        }
    }

    /// Smallest eigenvalue of the block.
    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            BlockValue::Dense(m) => min_eigenvalue(m),
            BlockValue::Diag(d) => d.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        match self {
            BlockValue::Dense(m) => crate::matrix::op_norm(m),
            BlockValue::Diag(d) => d.iter().map(|x| x.abs()).fold(0.0, f64::max),
        }
    }
}

/// Linear SDP in primal standard form, see the module docs.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    blocks: Vec<BlockKind>,
    objective: SparseHerm,
    equalities: Vec<(SparseHerm, f64)>,
    inequalities: Vec<(SparseHerm, f64)>,
}

impl SdpProblem {
    /// Problem over a single `dim x dim` Hermitian variable.
    pub fn new(dim: usize) -> Self {
        Self::with_blocks(vec![BlockKind::Hermitian(dim)])
    }

    pub fn with_blocks(blocks: Vec<BlockKind>) -> Self {
        Self {
            blocks,
            objective: SparseHerm::new(),
            equalities: Vec::new(),
            inequalities: Vec::new(),
        }
    }

    pub fn add_block(&mut self, kind: BlockKind) -> usize {
        self.blocks.push(kind);
        self.blocks.len() - 1
    }

    pub fn set_objective(&mut self, c: SparseHerm) -> &mut Self {
        self.objective = c;
        self
    }

    /// Adds `Re <a, Z> = b`; returns the multiplier index.
    pub fn add_equality(&mut self, a: SparseHerm, b: f64) -> usize {
        self.equalities.push((a, b));
        self.equalities.len() - 1
    }

    /// Adds `Re <a, Z> <= b`; returns the multiplier index (counted after all
    /// equalities).
    pub fn add_inequality(&mut self, a: SparseHerm, b: f64) -> usize {
        self.inequalities.push((a, b));
        self.inequalities.len() - 1
    }

    pub fn blocks(&self) -> &[BlockKind] {
        &self.blocks
    }

    /// Total dimension of the block-diagonal variable.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(BlockKind::size).sum()
    }

    pub fn num_equalities(&self) -> usize {
        self.equalities.len()
    }

    pub fn num_inequalities(&self) -> usize {
        self.inequalities.len()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() || self.blocks.iter().any(|b| b.size() == 0) {
            return Err(Error::InvalidProblem("every block needs dimension >= 1".into()));
        }
        let check = |a: &SparseHerm, what: &str| -> Result<()> {
            for e in a.entries() {
                let kind = self.blocks.get(e.block).ok_or_else(|| {
                    Error::InvalidProblem(format!("{what}: block {} does not exist", e.block))
                })?;
                let n = kind.size();
                if e.row >= n || e.col >= n {
                    return Err(Error::InvalidProblem(format!(
                        "{what}: entry ({}, {}) outside block of size {n}",
                        e.row, e.col
                    )));
                }
                if matches!(kind, BlockKind::Nonneg(_)) && e.row != e.col {
                    return Err(Error::InvalidProblem(format!(
                        "{what}: off-diagonal entry in a nonnegative block"
                    )));
                }
                if !e.value.re.is_finite() || !e.value.im.is_finite() {
                    return Err(Error::InvalidProblem(format!("{what}: non-finite entry")));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (k, (a, b)) in self.equalities.iter().chain(&self.inequalities).enumerate() {
            check(a, &format!("constraint {k}"))?;
            if k < self.equalities.len() && a.fro_norm() == 0.0 {
                return Err(Error::InvalidProblem(format!("equality {k} has a zero matrix")));
            }
            if !b.is_finite() {
                return Err(Error::InvalidProblem(format!("constraint {k}: non-finite bound")));
            }
        }
        Ok(())
    }
}

/// Termination status of [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    /// Primal infeasible; the multipliers hold an improving dual ray.
    Infeasible,
    /// Dual infeasible (primal unbounded); the primal holds an improving ray.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpSettings {
    /// Relative duality gap and residual target.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

impl SdpSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal variable, one value per user block (internal slack blocks are
    /// dropped).
    pub primal: Vec<BlockValue>,
    /// Dual slack `S = C - sum_k y_k A_k`, per user block.
    pub dual_slack: Vec<BlockValue>,
    /// Multipliers `y`: equalities first, then inequalities (`<= 0`).
    pub multipliers: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub status: SdpStatus,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    /// Dense primal block `k`; panics if the block is diagonal.
    pub fn primal_dense(&self, k: usize) -> &ComplexMatrix {
        self.primal[k].as_dense().expect("dense block")
    }

    pub fn slack_dense(&self, k: usize) -> &ComplexMatrix {
        self.dual_slack[k].as_dense().expect("dense block")
    }

    pub fn relative_gap(&self) -> f64 {
        self.gap.abs() / (1.0 + self.primal_value.abs() + self.dual_value.abs())
    }
}

/// Solves `p` with a primal-dual interior point method (HKM direction,
/// Mehrotra predictor-corrector).
pub fn solve(p: &SdpProblem, settings: &SdpSettings) -> Result<SdpSolution> {
    if settings.tol.is_nan() || settings.tol <= 0.0 || settings.max_iter == 0 {
        return Err(Error::Config("SDP tolerance must be positive and max_iter >= 1".into()));
    }
    p.validate()?;
    Ok(ipm::run(p, settings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    /// min t s.t. t I - diag(1, 3) >= 0, written with Z = t I - D.
    #[test]
    fn largest_eigenvalue_of_diagonal() {
        let mut p = SdpProblem::with_blocks(vec![BlockKind::Hermitian(2), BlockKind::Nonneg(1)]);
        p.set_objective(SparseHerm::diag(1, 0, 1.0));
        let mut a = SparseHerm::diag(0, 0, 1.0);
        a.add_diag(1, 0, -1.0);
        p.add_equality(a, -1.0);
        let mut a = SparseHerm::diag(0, 1, 1.0);
        a.add_diag(1, 0, -1.0);
        p.add_equality(a, -3.0);
        p.add_equality(SparseHerm::real_part(0, 0, 1), 0.0);
        p.add_equality(SparseHerm::imag_part(0, 0, 1), 0.0);
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert!(sol.is_optimal());
        assert_close(sol.primal_value, 3.0, 1e-7);
        assert!(sol.dual_value <= sol.primal_value + 1e-8);
    }

    #[test]
    fn trace_with_fixed_corner() {
        let mut p = SdpProblem::new(3);
        p.set_objective(SparseHerm::from_dense(0, &ComplexMatrix::identity(3)));
        p.add_equality(SparseHerm::diag(0, 0, 1.0), 1.0);
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert!(sol.is_optimal());
        assert_close(sol.primal_value, 1.0, 1e-7);
    }

    /// min w1 + w2 s.t. diag(w) >= J_2, as Z = diag(w) - J_2.
    #[test]
    fn diagonal_dominating_all_ones() {
        let mut p = SdpProblem::with_blocks(vec![BlockKind::Hermitian(2), BlockKind::Nonneg(2)]);
        let mut c = SparseHerm::new();
        c.add_diag(1, 0, 1.0).add_diag(1, 1, 1.0);
        p.set_objective(c);
        for i in 0..2 {
            let mut a = SparseHerm::diag(0, i, 1.0);
            a.add_diag(1, i, -1.0);
            p.add_equality(a, -1.0);
        }
        p.add_equality(SparseHerm::real_part(0, 0, 1), -1.0);
        p.add_equality(SparseHerm::imag_part(0, 0, 1), 0.0);
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert!(sol.is_optimal());
        assert_close(sol.primal_value, 4.0, 1e-7);
    }

    #[test]
    fn inequality_constraints_are_respected() {
        // min -Z_11 s.t. Z_11 <= 2, Z_22 = 1
        let mut p = SdpProblem::new(2);
        p.set_objective(SparseHerm::diag(0, 0, -1.0));
        p.add_inequality(SparseHerm::diag(0, 0, 1.0), 2.0);
        p.add_equality(SparseHerm::diag(0, 1, 1.0), 1.0);
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert!(sol.is_optimal());
        assert_close(sol.primal_value, -2.0, 1e-7);
        assert!(sol.multipliers[1] <= 1e-9);
        assert_eq!(sol.primal.len(), 1);
    }

    #[test]
    fn detects_infeasibility() {
        let mut p = SdpProblem::new(2);
        p.add_equality(SparseHerm::diag(0, 0, 1.0), -1.0);
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn rejects_malformed_problems() {
        let mut p = SdpProblem::new(2);
        p.add_equality(SparseHerm::diag(0, 5, 1.0), 1.0);
        assert!(matches!(
            solve(&p, &SdpSettings::default()),
            Err(Error::InvalidProblem(_))
        ));
        let mut p = SdpProblem::with_blocks(vec![BlockKind::Nonneg(2)]);
        p.add_equality(SparseHerm::real_part(0, 0, 1), 1.0);
        assert!(solve(&p, &SdpSettings::default()).is_err());
        assert!(solve(&SdpProblem::new(0), &SdpSettings::default()).is_err());
    }

    #[test]
    fn weak_duality_and_psd_primal() {
        // min <C, Z> s.t. diag(Z) = 1 with a complex C (a max-cut style relaxation)
        let c = ComplexMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                Complex64::new(0.0, 0.0)
            } else {
                let t = (i * 4 + j) as f64;
                let z = Complex64::new(t.sin(), (2.0 * t).cos());
                if i < j { z } else { Complex64::new(0.0, 0.0) }
            }
        });
        let c = &c + &c.adjoint();
        let mut p = SdpProblem::new(4);
        p.set_objective(SparseHerm::from_dense(0, &c));
        for i in 0..4 {
            p.add_equality(SparseHerm::diag(0, i, 1.0), 1.0);
        }
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert!(sol.is_optimal());
        assert!(sol.dual_value <= sol.primal_value + 1e-8 * (1.0 + sol.primal_value.abs()));
        let z = sol.primal_dense(0);
        assert!(min_eigenvalue(z) >= -1e-9 * crate::matrix::op_norm(z));
        assert!(min_eigenvalue(sol.slack_dense(0)) >= -1e-8);
    }
}
