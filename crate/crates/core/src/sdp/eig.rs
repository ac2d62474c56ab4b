//! Hermitian eigensolver (cyclic complex Jacobi), Cholesky and the PSD
//! helpers built from them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::svd::{jacobi_rotation, rotate_columns};
use crate::matrix::{hs_norm, ComplexMatrix, RankRule, ZERO};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `M = U diag(values) U^*`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermEig {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let ul = ComplexMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.values[j]);
        ul.matmul(&self.vectors.adjoint())
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermitian_defect();
    if defect > 1e-10 * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Eigenvalues and eigenvectors of a Hermitian matrix.
pub fn herm_eig(m: &ComplexMatrix) -> Result<HermEig> {
    check_hermitian(m)?;
    Ok(jacobi_eig(&m.hermitian_part()))
}

/// Jacobi sweep on an exactly Hermitian input.
pub(crate) fn jacobi_eig(m: &ComplexMatrix) -> HermEig {
    let n = m.rows();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let fro = hs_norm(m);
    let floor = fro * 1e-300_f64.max(f64::EPSILON * 1e-3);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let r = b.norm();
                if r <= floor || r <= f64::EPSILON * (app.abs() * aqq.abs()).sqrt() {
                    continue;
                }
                rotated = true;
                let (c, s, e) = jacobi_rotation(app, aqq, b);
                rotate_columns(&mut a, p, q, c, s, e);
                // rows: A <- G^* A
                let ec = e.conj();
                for j in 0..n {
                    let xp = a[(p, j)];
                    let xq = a[(q, j)];
                    a[(p, j)] = xp * c - xq * ec * s;
                    a[(q, j)] = xp * s + xq * ec * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                rotate_columns(&mut v, p, q, c, s, e);
            }
        }
        if !rotated {
            break;
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    HermEig {
        values: order.iter().map(|&i| diag[i]).collect(),
        vectors: v.select_columns(&order),
    }
}

/// Lower Cholesky factor `L` with `M = L L^*`; `None` if `M` is not
/// numerically positive definite.
pub fn cholesky(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix.
pub(crate) fn lower_inverse(l: &ComplexMatrix) -> ComplexMatrix {
    let n = l.rows();
    let mut inv = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = Complex64::new(1.0, 0.0) / l[(j, j)];
        for i in j + 1..n {
            let mut s = ZERO;
            for k in j..i {
                s += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    inv
}

/// Inverse of a Hermitian positive definite matrix from its Cholesky factor.
#[cfg(test)]
fn hpd_inverse_from_chol(l: &ComplexMatrix) -> ComplexMatrix {
    let li = lower_inverse(l);
    li.adjoint_matmul(&li).hermitian_part()
}

/// `F` with `F^* F = M` for Hermitian PSD `M`; `F` keeps one row per
/// eigenvalue above the rank threshold.
pub fn psd_factor(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    psd_factor_with(m, RankRule::default())
}

pub fn psd_factor_with(m: &ComplexMatrix, rule: RankRule) -> Result<ComplexMatrix> {
    let eig = herm_eig(m)?;
    let n = m.rows();
    let top = eig.max().max(0.0);
    if eig.min() < -1e-9 * top.max(f64::MIN_POSITIVE) {
        return Err(Error::Indefinite {
            min_eigenvalue: eig.min(),
        });
    }
    let tau = rule.threshold(top, n);
    let keep: Vec<usize> = (0..n).rev().filter(|&k| eig.values[k] > tau).collect();
    Ok(ComplexMatrix::from_fn(keep.len(), n, |r, j| {
        let k = keep[r];
        eig.vectors[(j, k)].conj() * eig.values[k].sqrt()
    }))
}

/// Principal square root of a Hermitian PSD matrix; negative eigenvalues
/// within round-off are clipped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = herm_eig(m)?;
    let top = eig.max().max(0.0);
    if eig.min() < -1e-9 * top.max(1.0) {
        return Err(Error::Indefinite {
            min_eigenvalue: eig.min(),
        });
    }
    let n = m.rows();
    let roots: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let ul = ComplexMatrix::from_fn(n, n, |i, j| eig.vectors[(i, j)] * roots[j]);
    Ok(ul.matmul(&eig.vectors.adjoint()).hermitian_part())
}

/// Smallest eigenvalue of a Hermitian matrix (input symmetrised first).
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    jacobi_eig(&m.hermitian_part()).min()
}
