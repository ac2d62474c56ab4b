//! Bracketing the gauge of the closed convex hull of the unimodular rank-one
//! matrices `conj(l) r^T` (`|l_i| = |r_j| = 1`).
//!
//! The upper bound is a column-generation LP: `Y` is written as a non-negative
//! combination of atoms, starting from the pseudo-atoms `w E_ij` (`w^4 = 1`),
//! which lie in the hull because `E_ij` is the sign average of the atoms
//! with `l_i = r_j = 1`. New atoms are priced by the bilinear-form search
//! on the LP dual. The lower bound uses the facts that the hull sits inside
//! the `gamma_2` unit ball and that `<Y, D> / bx_cb(D)` pairs `Y` with a
//! member of the polar ball.

use num_complex::Complex64;
use serde::Serialize;

use super::{cb_bracket, LabConfig};
use crate::error::Result;
use crate::matrix::{hs_norm, pairing_unchecked, phase, ComplexMatrix};
use crate::norms::{bx_cb, bx_norm, gamma2, DualWitness};
use crate::sdp::{self, BlockKind, SdpProblem, SdpSettings, SdpStatus, SparseHerm};

const MAX_ROUNDS: usize = 40;
const PRICING_MULTISTARTS: usize = 16;
const LP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullBracket {
    pub lower: f64,
    pub upper: f64,
    /// Column-generation rounds used.
    pub rounds: usize,
    /// Atoms in the final dictionary.
    pub atoms: usize,
}

impl HullBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn pseudo_atoms(m: usize, n: usize) -> Vec<ComplexMatrix> {
    let phases = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut atoms = Vec::with_capacity(4 * m * n);
    for i in 0..m {
        for j in 0..n {
            for w in phases {
                atoms.push(ComplexMatrix::unit(m, n, i, j).scale_c(w));
            }
        }
    }
    atoms
}

/// `min sum lambda` with `sum lambda_k A_k = Y`, `lambda >= 0`.
fn solve_lp(y: &ComplexMatrix, atoms: &[ComplexMatrix]) -> Result<sdp::SdpSolution> {
    let (m, n) = y.shape();
    let mut p = SdpProblem::with_blocks(vec![BlockKind::Nonneg(atoms.len())]);
    let mut c = SparseHerm::new();
    for k in 0..atoms.len() {
        c.add_diag(0, k, 1.0);
    }
    p.set_objective(c);
    for i in 0..m {
        for j in 0..n {
            let mut re = SparseHerm::new();
            let mut im = SparseHerm::new();
            for (k, a) in atoms.iter().enumerate() {
                let v = a[(i, j)];
                if v.re != 0.0 {
                    re.add_diag(0, k, v.re);
                }
                if v.im != 0.0 {
                    im.add_diag(0, k, v.im);
                }
            }
            p.add_equality(re, y[(i, j)].re);
            p.add_equality(im, y[(i, j)].im);
        }
    }
    sdp::solve(&p, &SdpSettings::with_tol(LP_TOL))
}

/// Upper bound from any non-negative combination: its weight plus the
/// `l1` norm of the residual (covered by pseudo-atoms).
fn certified_upper(y: &ComplexMatrix, atoms: &[ComplexMatrix], lambda: &[f64]) -> f64 {
    let mut r = y.clone();
    let mut weight = 0.0;
    for (a, &l) in atoms.iter().zip(lambda) {
        let l = l.max(0.0);
        weight += l;
        for (ri, ai) in r.as_mut_slice().iter_mut().zip(a.as_slice()) {
            *ri -= ai * l;
        }
    }
    let l1: f64 = r.as_slice().iter().map(|z| z.re.abs() + z.im.abs()).sum();
    weight + l1
}

/// Certified bracket for the hull gauge of `Y`.
pub fn hull_gauge(y: &ComplexMatrix, cfg: &LabConfig) -> Result<HullBracket> {
    let (m, n) = y.shape();
    let s = hs_norm(y);
    if s == 0.0 {
        return Ok(HullBracket {
            lower: 0.0,
            upper: 0.0,
            rounds: 0,
            atoms: 0,
        });
    }
    let yn = y.scale(1.0 / s);

    // the pseudo-atoms alone cover Y with weight sum (|Re| + |Im|)
    let mut upper = yn.as_slice().iter().map(|z| z.re.abs() + z.im.abs()).sum::<f64>();
    let mut atoms = pseudo_atoms(m, n);
    let pricing = cfg.heuristic.multistarts(PRICING_MULTISTARTS);
    let mut last_dual: Option<ComplexMatrix> = None;
    let mut rounds = 0;
    while rounds < MAX_ROUNDS {
        rounds += 1;
        let sol = solve_lp(&yn, &atoms)?;
        if matches!(sol.status, SdpStatus::Infeasible | SdpStatus::Unbounded) {
            break;
        }
        let lambda = sol.primal[0].as_diag().map(<[f64]>::to_vec).unwrap_or_default();
        upper = upper.min(certified_upper(&yn, &atoms, &lambda));

        let d = ComplexMatrix::from_fn(m, n, |i, j| {
            let k = 2 * (i * n + j);
            Complex64::new(sol.multipliers[k], sol.multipliers[k + 1])
        });
        // price: max over atoms of Re <A, D> = |a^T conj(D) b|
        let cert = bx_norm(&d.conj(), &pricing)?;
        last_dual = Some(d.clone());
        let Some(DualWitness::Vectors { a, b: Some(b) }) = &cert.dual_witness else {
            break;
        };
        let outer = ComplexMatrix::from_fn(m, n, |i, j| a.as_slice()[i] * b.as_slice()[j]);
        let v = pairing_unchecked(&outer, &d);
        if v.norm() <= 1.0 + 1e-7 {
            break;
        }
        atoms.push(outer.scale_c(phase(v).conj()));
    }

    let mut lower = cb_bracket(&gamma2(&yn, &cfg.cb)?).0;
    if let Some(d) = last_dual {
        let bd = cb_bracket(&bx_cb(&d, &cfg.cb)?).1;
        if bd > 0.0 {
            lower = lower.max(pairing_unchecked(&yn, &d).norm() / bd);
        }
    }
    Ok(HullBracket {
        lower: lower * s,
        upper: upper * s,
        rounds,
        atoms: atoms.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_matrix_has_gauge_one() {
        let h = hull_gauge(&ComplexMatrix::unit(3, 2, 1, 1), &LabConfig::default()).unwrap();
        assert!((h.upper - 1.0).abs() < 1e-6, "{h:?}");
        assert!((h.lower - 1.0).abs() < 1e-6, "{h:?}");
    }

    #[test]
    fn hadamard_bracket_is_consistent() {
        let h2 = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, -1.0]).unwrap();
        let h = hull_gauge(&h2, &LabConfig::default()).unwrap();
        // gamma2(H2) = sqrt 2 is a lower bound; the pseudo-atoms give 4
        assert!(h.lower >= 2f64.sqrt() - 1e-6, "{h:?}");
        assert!(h.upper <= 4.0 + 1e-9 && h.upper >= h.lower, "{h:?}");
    }

    #[test]
    fn zero_has_zero_gauge() {
        let h = hull_gauge(&ComplexMatrix::zeros(2, 2), &LabConfig::default()).unwrap();
        assert_eq!(h.upper, 0.0);
    }
}
