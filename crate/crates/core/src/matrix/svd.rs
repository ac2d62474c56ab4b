//! One-sided (Hestenes) Jacobi SVD for small dense complex matrices.

use num_complex::Complex64;

use super::{ComplexMatrix, ZERO};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `X = U diag(sigma) V^*` with `k = min(m, n)` terms, `sigma`
/// descending. Columns of `U` (or `V` when `m < n`) that belong to a zero
/// singular value are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Complex Jacobi rotation for the Hermitian 2x2 block `[[a, b], [conj b, d]]`.
///
/// Returns `(c, s, e)` such that `G = [[c, s], [-s e, c e]]` diagonalises the
/// block through `G^* H G`. `e` is the unit phase `conj(b)/|b|`.
pub(crate) fn jacobi_rotation(a: f64, d: f64, b: Complex64) -> (f64, f64, Complex64) {
    let r = b.norm();
    if r == 0.0 {
        return (1.0, 0.0, Complex64::new(1.0, 0.0));
    }
    let e = b.conj() / r;
    let theta = (d - a) / (2.0 * r);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c, e)
}

/// Applies `A <- A G` on columns `p, q` of a row-major matrix.
pub(crate) fn rotate_columns(m: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, e: Complex64) {
    let cols = m.cols();
    let data = m.as_mut_slice();
    let se = e * s;
    let ce = e * c;
    for row in data.chunks_exact_mut(cols) {
        let ap = row[p];
        let aq = row[q];
        row[p] = ap * c - aq * se;
        row[q] = ap * s + aq * ce;
    }
}

impl Svd {
    pub fn new(x: &ComplexMatrix) -> Self {
        let (m, n) = x.shape();
        if m < n {
            let t = Self::tall(&x.adjoint());
            return Svd {
                u: t.v,
                sigma: t.sigma,
                v: t.u,
            };
        }
        Self::tall(x)
    }

    fn tall(x: &ComplexMatrix) -> Self {
        let (m, n) = x.shape();
        let mut a = x.clone();
        let mut v = ComplexMatrix::identity(n);
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                    for i in 0..m {
                        let ap = a[(i, p)];
                        let aq = a[(i, q)];
                        alpha += ap.norm_sqr();
                        beta += aq.norm_sqr();
                        gamma += ap.conj() * aq;
                    }
                    if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                        continue;
                    }
                    rotated = true;
                    let (c, s, e) = jacobi_rotation(alpha, beta, gamma);
                    rotate_columns(&mut a, p, q, c, s, e);
                    rotate_columns(&mut v, p, q, c, s, e);
                }
            }
            if !rotated {
                break;
            }
        }

        let norms: Vec<f64> = (0..n)
            .map(|j| (0..m).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

        let mut u = ComplexMatrix::zeros(m, n);
        let mut vs = ComplexMatrix::zeros(n, n);
        let mut sigma = Vec::with_capacity(n);
        for (k, &j) in order.iter().enumerate() {
            let s = norms[j];
            sigma.push(s);
            if s > 0.0 {
                for i in 0..m {
                    u[(i, k)] = a[(i, j)] / s;
                }
            }
            for i in 0..n {
                vs[(i, k)] = v[(i, j)];
            }
        }
        Svd { u, sigma, v: vs }
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.sigma.len();
        let us = ComplexMatrix::from_fn(self.u.rows(), k, |i, j| self.u[(i, j)] * self.sigma[j]);
        us.matmul(&self.v.adjoint())
    }

    /// Unitary polar part `U V^*` restricted to the singular values above
    /// `tau`. It is the contraction `A` maximising `Re <A, X>`.
    pub fn polar_part(&self, tau: f64) -> ComplexMatrix {
        let keep: Vec<usize> = (0..self.sigma.len()).filter(|&k| self.sigma[k] > tau).collect();
        let u = self.u.select_columns(&keep);
        let v = self.v.select_columns(&keep);
        u.matmul(&v.adjoint())
    }
}
