//! Classical norms by seeded multistart ascent.
//!
//! All searches evaluate their objective exactly at the returned witness, so
//! the reported value is always a valid lower bound. With `real_signs` and at
//! most 20 free signs the bilinear and linear searches are exhaustive.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CertMeta, CertStatus, DualWitness, HeuristicConfig, Interpretation, NormCertificate, NormKind};
use crate::error::Result;
use crate::matrix::{hs_norm, op_norm, phase, schur_unchecked, ComplexMatrix, ComplexVector, ONE, ZERO};
use crate::rng;

/// Largest sign count enumerated exhaustively.
const MAX_EXHAUSTIVE: usize = 20;
const MAX_ROUNDS: usize = 1000;

fn improved(new: f64, old: f64) -> bool {
    new > old + 1e-15 * old.abs().max(1e-300)
}

/// Runs `start` for every multistart index in parallel and keeps the best
/// result; ties go to the lowest index.
fn multistart<W: Send>(
    cfg: &HeuristicConfig,
    start: impl Fn(usize, &mut ChaCha8Rng) -> (f64, W) + Sync,
) -> (f64, W) {
    (0..cfg.multistarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(cfg.seed, k as u64);
            let (v, w) = start(k, &mut rng);
            (k, v, w)
        })
        .reduce_with(|a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
        .map(|(_, v, w)| (v, w))
        .expect("at least one start")
}

fn heuristic_cert(kind: NormKind, value: f64, witness: DualWitness, cfg: &HeuristicConfig, exhaustive: bool) -> NormCertificate {
    NormCertificate {
        kind,
        value,
        gap: 0.0,
        status: if exhaustive {
            CertStatus::Exhaustive
        } else {
            CertStatus::Heuristic
        },
        exact: exhaustive,
        primal_witness: None,
        dual_witness: Some(witness),
        meta: CertMeta {
            multistarts: (!exhaustive).then_some(cfg.multistarts),
            seed: (!exhaustive).then_some(cfg.seed),
            lower_bound: Some(value),
            ..CertMeta::default()
        },
    }
}

fn random_phases(rng: &mut ChaCha8Rng, n: usize, real: bool) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            if real {
                if rand::Rng::random::<bool>(rng) {
                    ONE
                } else {
                    -ONE
                }
            } else {
                rng::unit_phase(rng)
            }
        })
        .collect()
}

fn sign(x: f64) -> Complex64 {
    if x < 0.0 {
        -ONE
    } else {
        ONE
    }
}

/// `max |sum_i a_i w_i|` over `a in {+-1}^m`, exactly.
///
/// For a fixed direction `theta` the best signs are `sign Re(e^{-i theta} w_i)`;
/// they only change where some `Re(e^{-i theta} w_i)` vanishes, so checking
/// one direction inside every arc between such critical angles is enough.
pub(crate) fn best_signs(w: &[Complex64]) -> (Vec<Complex64>, f64) {
    let mut angles: Vec<f64> = w
        .iter()
        .filter(|z| z.norm() > 0.0)
        .map(|z| (z.arg() + PI / 2.0).rem_euclid(PI))
        .collect();
    if angles.is_empty() {
        return (vec![ONE; w.len()], 0.0);
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut best = (Vec::new(), -1.0);
    for k in 0..angles.len() {
        let next = if k + 1 < angles.len() { angles[k + 1] } else { angles[0] + PI };
        let theta = 0.5 * (angles[k] + next);
        let rot = Complex64::from_polar(1.0, -theta);
        let a: Vec<Complex64> = w.iter().map(|z| sign((rot * z).re)).collect();
        let v = a.iter().zip(w).map(|(s, z)| s * z).sum::<Complex64>().norm();
        if v > best.1 {
            best = (a, v);
        }
    }
    best
}

/// Enumerates `b in {+-1}^n` with `b_0 = +1` in Gray-code order, maintaining
/// `w = X b`, and returns the `b` maximising `score(w)` (first found on ties).
fn gray_search(x: &ComplexMatrix, score: impl Fn(&[Complex64]) -> f64) -> (Vec<Complex64>, f64) {
    let (m, n) = x.shape();
    let mut b = vec![ONE; n];
    let mut w: Vec<Complex64> = (0..m).map(|i| x.row(i).iter().sum()).collect();
    let mut best_b = b.clone();
    let mut best = score(&w);
    let total: u64 = 1 << (n - 1);
    for step in 1..total {
        // flip the coordinate of the lowest set bit, shifted past b_0
        let j = step.trailing_zeros() as usize + 1;
        let delta = -b[j] * 2.0;
        for (i, wi) in w.iter_mut().enumerate() {
            *wi += x[(i, j)] * delta;
        }
        b[j] = -b[j];
        let v = score(&w);
        if v > best {
            best = v;
            best_b.clone_from(&b);
        }
    }
    (best_b, best)
}

/// Classical norm of the bilinear form, `max |a^T X b|` over unimodular (or
/// `+-1`) vectors `a, b`.
pub fn bx_norm(x: &ComplexMatrix, cfg: &HeuristicConfig) -> Result<NormCertificate> {
    cfg.validate()?;
    let kind = NormKind::classical(Interpretation::B);
    let (m, n) = x.shape();
    if hs_norm(x) == 0.0 {
        return Ok(NormCertificate::zero(kind, m, n));
    }

    if cfg.real_signs && m.min(n) <= MAX_EXHAUSTIVE {
        // enumerate the shorter side; the other one is solved exactly
        let transposed = n > m;
        let xt = if transposed { x.transpose() } else { x.clone() };
        let (b, _) = gray_search(&xt, |w| best_signs(w).1);
        let (a, _) = best_signs(&xt.matvec(&b));
        let (a, b) = if transposed { (b, a) } else { (a, b) };
        let value = bilinear(x, &a, &b).norm();
        return Ok(heuristic_cert(kind, value, vectors(a, Some(b)), cfg, true));
    }

    let (value, (a, b)) = multistart(cfg, |k, rng| {
        let b0 = if k == 0 { vec![ONE; n] } else { random_phases(rng, n, cfg.real_signs) };
        bx_ascent(x, b0, cfg)
    });
    Ok(heuristic_cert(kind, value, vectors(a, Some(b)), cfg, false))
}

fn vectors(a: Vec<Complex64>, b: Option<Vec<Complex64>>) -> DualWitness {
    DualWitness::Vectors {
        a: ComplexVector::from_vec(a),
        b: b.map(ComplexVector::from_vec),
    }
}

fn bilinear(x: &ComplexMatrix, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    x.matvec(b).iter().zip(a).map(|(w, s)| w * s).sum()
}

/// Best `a` for fixed `b` and its value.
fn bx_best_a(x: &ComplexMatrix, b: &[Complex64], real: bool) -> (Vec<Complex64>, f64) {
    let w = x.matvec(b);
    if real {
        best_signs(&w)
    } else {
        let a: Vec<Complex64> = w.iter().map(|z| phase(*z).conj()).collect();
        (a, w.iter().map(|z| z.norm()).sum())
    }
}

fn bx_value(x: &ComplexMatrix, b: &[Complex64], real: bool) -> f64 {
    bx_best_a(x, b, real).1
}

fn bx_ascent(x: &ComplexMatrix, mut b: Vec<Complex64>, cfg: &HeuristicConfig) -> (f64, (Vec<Complex64>, Vec<Complex64>)) {
    let real = cfg.real_signs;
    let xt = x.transpose();
    let mut value = bx_value(x, &b, real);
    for _ in 0..MAX_ROUNDS {
        // alternate until the bilinear ascent stalls
        loop {
            let (a, _) = bx_best_a(x, &b, real);
            let (b_new, _) = bx_best_a(&xt, &a, real);
            let v = bx_value(x, &b_new, real);
            if improved(v, value) {
                b = b_new;
                value = v;
            } else {
                break;
            }
        }
        // coordinate refinement on a phase grid (or single sign flips)
        let mut moved = false;
        let grid: Vec<Complex64> = if real {
            vec![-ONE]
        } else {
            (1..cfg.grid).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / cfg.grid as f64)).collect()
        };
        for j in 0..b.len() {
            let orig = b[j];
            let mut best = (orig, value);
            for g in &grid {
                b[j] = orig * g;
                let v = bx_value(x, &b, real);
                if improved(v, best.1) {
                    best = (b[j], v);
                }
            }
            b[j] = best.0;
            if best.1 > value {
                value = best.1;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    let (a, _) = bx_best_a(x, &b, real);
    let v = bilinear(x, &a, &b).norm();
    (v, (a, b))
}

/// Coordinate ascent of `||M a||_2` over unimodular (or `+-1`) `a`; returns
/// the final value.
fn f_ascent(mat: &ComplexMatrix, a: &mut [Complex64], real: bool) -> f64 {
    let (rows, cols) = mat.shape();
    let mut r = mat.matvec(a);
    let mut value = r.iter().map(|z| z.norm_sqr()).sum::<f64>();
    for _ in 0..MAX_ROUNDS {
        let before = value;
        for j in 0..cols {
            let mut c = ZERO;
            for i in 0..rows {
                r[i] -= mat[(i, j)] * a[j];
                c += mat[(i, j)].conj() * r[i];
            }
            let new = if real { sign(c.re) } else if c.norm() > 0.0 { phase(c) } else { a[j] };
            a[j] = new;
            for i in 0..rows {
                r[i] += mat[(i, j)] * new;
            }
        }
        value = r.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if !improved(value, before) {
            break;
        }
    }
    mat.matvec(a).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn fx_search(x: &ComplexMatrix, cfg: &HeuristicConfig, kind: NormKind) -> Result<NormCertificate> {
    cfg.validate()?;
    let (m, n) = x.shape();
    if hs_norm(x) == 0.0 {
        return Ok(NormCertificate::zero(kind, m, n));
    }
    if cfg.real_signs && n <= MAX_EXHAUSTIVE {
        let (a, _) = gray_search(x, |w| w.iter().map(|z| z.norm_sqr()).sum());
        let value = x.matvec(&a).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        return Ok(heuristic_cert(kind, value, vectors(a, None), cfg, true));
    }
    let (value, a) = multistart(cfg, |k, rng| {
        let mut a = if k == 0 { vec![ONE; n] } else { random_phases(rng, n, cfg.real_signs) };
        let v = f_ascent(x, &mut a, cfg.real_signs);
        (v, a)
    });
    Ok(heuristic_cert(kind, value, vectors(a, None), cfg, false))
}

/// Classical norm of `F_X`, `max ||X a||_2` over `||a||_inf <= 1`.
pub fn fx_norm(x: &ComplexMatrix, cfg: &HeuristicConfig) -> Result<NormCertificate> {
    fx_search(x, cfg, NormKind::classical(Interpretation::F))
}

/// Classical norm of `G_X`, `max ||a^T X||_2` over `||a||_inf <= 1`.
pub fn gx_norm(x: &ComplexMatrix, cfg: &HeuristicConfig) -> Result<NormCertificate> {
    fx_search(&x.transpose(), cfg, NormKind::classical(Interpretation::G))
}

/// Contraction `A` maximising `Re <A, K>` (the polar part of `K`).
fn best_contraction(k: &ComplexMatrix) -> ComplexMatrix {
    let svd = k.svd();
    let top = svd.sigma.first().copied().unwrap_or(0.0);
    svd.polar_part(1e-14 * top)
}

fn random_contraction(rng: &mut ChaCha8Rng, m: usize, n: usize) -> ComplexMatrix {
    best_contraction(&rng::gaussian_matrix(rng, m, n, false))
}

/// Top singular triple `(sigma, u, v)`.
fn top_pair(m: &ComplexMatrix) -> (f64, Vec<Complex64>, Vec<Complex64>) {
    let svd = m.svd();
    let u = (0..m.rows()).map(|i| svd.u[(i, 0)]).collect();
    let v = (0..m.cols()).map(|j| svd.v[(j, 0)]).collect();
    (svd.sigma[0], u, v)
}

/// Lower bound for `||S_X|| = max { ||X o A|| : ||A|| <= 1 }` by alternating
/// between the top singular pair of `X o A` and the best contraction for it.
pub fn schur_norm_lb(x: &ComplexMatrix, cfg: &HeuristicConfig) -> Result<NormCertificate> {
    cfg.validate()?;
    let kind = NormKind::classical(Interpretation::S);
    let (m, n) = x.shape();
    if hs_norm(x) == 0.0 {
        return Ok(NormCertificate::zero(kind, m, n));
    }
    let xc = x.conj();
    let (value, a) = multistart(cfg, |k, rng| {
        let mut a = if k == 0 { best_contraction(&xc) } else { random_contraction(rng, m, n) };
        let mut value = op_norm(&schur_unchecked(x, &a));
        for _ in 0..MAX_ROUNDS {
            let (_, u, v) = top_pair(&schur_unchecked(x, &a));
            let kmat = ComplexMatrix::from_fn(m, n, |i, j| xc[(i, j)] * u[i] * v[j].conj());
            let cand = best_contraction(&kmat);
            let cv = op_norm(&schur_unchecked(x, &cand));
            if improved(cv, value) {
                a = cand;
                value = cv;
            } else {
                break;
            }
        }
        (value, a)
    });
    Ok(heuristic_cert(kind, value, DualWitness::Contraction { a: None, b: a }, cfg, false))
}

/// Lower bound for `||T_X|| = max ||(X o B)^T a||_2` over `||a||_inf <= 1`,
/// `||B|| <= 1`, alternating the vector ascent in `a` with the best
/// contraction `B` for the current output direction.
pub fn tx_norm(x: &ComplexMatrix, cfg: &HeuristicConfig) -> Result<NormCertificate> {
    cfg.validate()?;
    let kind = NormKind::classical(Interpretation::T);
    let (m, n) = x.shape();
    if hs_norm(x) == 0.0 {
        return Ok(NormCertificate::zero(kind, m, n));
    }
    let xc = x.conj();
    let eval = |a: &[Complex64], b: &ComplexMatrix| -> f64 {
        schur_unchecked(x, b).transpose().matvec(a).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    };
    let (value, (a, b)) = multistart(cfg, |k, rng| {
        let (mut a, mut b) = if k == 0 {
            (vec![ONE; m], best_contraction(&xc))
        } else {
            (random_phases(rng, m, cfg.real_signs), random_contraction(rng, m, n))
        };
        let mut value = eval(&a, &b);
        for _ in 0..MAX_ROUNDS {
            let mut a_new = a.clone();
            f_ascent(&schur_unchecked(x, &b).transpose(), &mut a_new, cfg.real_signs);
            let out = schur_unchecked(x, &b).transpose().matvec(&a_new);
            let nrm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm == 0.0 {
                break;
            }
            let kmat = ComplexMatrix::from_fn(m, n, |i, j| xc[(i, j)] * a_new[i].conj() * out[j] / nrm);
            let b_new = best_contraction(&kmat);
            let v = eval(&a_new, &b_new);
            if improved(v, value) {
                a = a_new;
                b = b_new;
                value = v;
            } else {
                break;
            }
        }
        (value, (a, b))
    });
    Ok(heuristic_cert(
        kind,
        value,
        DualWitness::Contraction {
            a: Some(ComplexVector::from_vec(a)),
            b,
        },
        cfg,
        false,
    ))
}
