//! Completely bounded norms through semidefinite programs.
//!
//! Every program is solved for `X / ||X||_HS` and the certificate is scaled
//! back, which keeps the solver data well conditioned.

use num_complex::Complex64;
use serde::Serialize;

use super::{CbConfig, CertMeta, CertStatus, DualWitness, Interpretation, NormCertificate, NormKind, PrimalWitness};
use crate::error::{Error, Result};
use crate::factor::rank_reduce;
use crate::matrix::{apply_b, hs_norm, pairing_unchecked, ComplexMatrix, ComplexVector};
use crate::sdp::{self, psd_factor, BlockKind, SdpProblem, SdpSolution, SdpStatus, SparseHerm};

fn run(p: &SdpProblem, cfg: &CbConfig) -> Result<SdpSolution> {
    let sol = sdp::solve(p, &cfg.sdp)?;
    match sol.status {
        SdpStatus::Optimal | SdpStatus::MaxIterations => Ok(sol),
        status => Err(Error::Solver {
            status,
            iterations: sol.iterations,
            gap: sol.gap,
        }),
    }
}

fn status_of(sol: &SdpSolution) -> CertStatus {
    if sol.is_optimal() {
        CertStatus::Optimal
    } else {
        CertStatus::Inexact
    }
}

fn meta_of(sol: &SdpSolution, lower: f64) -> CertMeta {
    CertMeta {
        solver_status: Some(sol.status),
        iterations: Some(sol.iterations),
        primal_infeasibility: Some(sol.primal_infeasibility),
        dual_infeasibility: Some(sol.dual_infeasibility),
        lower_bound: Some(lower),
        ..CertMeta::default()
    }
}

/// Adds `Z[r0 + i][c0 + j] = X_ij` (real and imaginary parts) for block 0.
fn pin_off_block(p: &mut SdpProblem, x: &ComplexMatrix, r0: usize, c0: usize) {
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            let v = x[(i, j)];
            p.add_equality(SparseHerm::real_part(0, r0 + i, c0 + j), v.re);
            p.add_equality(SparseHerm::imag_part(0, r0 + i, c0 + j), v.im);
        }
    }
}

/// Complex matrix assembled from the multipliers of [`pin_off_block`].
fn pinned_multipliers(y: &[f64], m: usize, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, n, |i, j| {
        let k = 2 * (i * n + j);
        Complex64::new(y[k], y[k + 1])
    })
}

/// `diag(I, -I) Z diag(I, -I)`: flips the sign of the off-diagonal blocks.
fn flip_off_blocks(z: &ComplexMatrix, m: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(z.rows(), z.cols(), |i, j| {
        if (i < m) != (j < m) {
            -z[(i, j)]
        } else {
            z[(i, j)]
        }
    })
}

fn finish(
    kind: NormKind,
    sol: &SdpSolution,
    value: f64,
    lower: f64,
    primal: PrimalWitness,
    dual: DualWitness,
) -> NormCertificate {
    let status = status_of(sol);
    NormCertificate {
        kind,
        value,
        gap: value - lower,
        status,
        exact: status == CertStatus::Optimal,
        primal_witness: Some(primal),
        dual_witness: Some(dual),
        meta: meta_of(sol, lower),
    }
}

/// `gamma_2(X) = ||S_X||_cb = ||S_X||`, the least `||L||_c ||R||_c` over
/// factorizations `X = L^* R`.
///
/// Solves `min t` over `[[P, X], [X^*, Q]] >= 0` with every diagonal entry
/// equal to `t`. The dual witness `Y` has `bx_cb(Y) <= 1`; its `gram` is
/// `[[diag(p), Y], [Y^*, diag(q)]]` with `sum p + sum q <= 2`.
pub fn gamma2(x: &ComplexMatrix, cfg: &CbConfig) -> Result<NormCertificate> {
    let kind = NormKind::cb(Interpretation::S);
    let (m, n) = x.shape();
    let s = hs_norm(x);
    if s == 0.0 {
        return Ok(NormCertificate::zero(kind, m, n));
    }
    let xn = x.scale(1.0 / s);
    let d = m + n;
    let mut p = SdpProblem::with_blocks(vec![BlockKind::Hermitian(d), BlockKind::Nonneg(1)]);
    p.set_objective(SparseHerm::diag(1, 0, 1.0));
    pin_off_block(&mut p, &xn, 0, m);
    for k in 0..d {
        let mut a = SparseHerm::diag(0, k, 1.0);
        a.add_diag(1, 0, -1.0);
        p.add_equality(a, 0.0);
    }
    let sol = run(&p, cfg)?;

    let y = pinned_multipliers(&sol.multipliers, m, n);
    let lower = pairing_unchecked(&xn, &y).re * s;
    let gram = flip_off_blocks(&sol.slack_dense(0).scale(2.0), m);
    Ok(finish(
        kind,
        &sol,
        sol.primal_value * s,
        lower,
        PrimalWitness::BlockGram {
            z: sol.primal_dense(0).scale(s),
        },
        DualWitness::Pairing { y, gram: Some(gram) },
    ))
}

/// `||B_X||_cb`, the least `(sum p + sum q) / 2` with
/// `[[diag(p), X], [X^*, diag(q)]] >= 0`.
///
/// The program solved is the dual one, `min Re <[[0, X], [X^*, 0]], Z>` with
/// `Z >= 0` and `Z_kk = 1/2`; `p, q` come from its multipliers and the
/// pairing witness `Y` (with `gamma2(Y) <= 1`) from `Z`.
pub fn bx_cb(x: &ComplexMatrix, cfg: &CbConfig) -> Result<NormCertificate> {
    let kind = NormKind::cb(Interpretation::B);
    let (m, n) = x.shape();
    let s = hs_norm(x);
    if s == 0.0 {
        return Ok(NormCertificate::zero(kind, m, n));
    }
    let xn = x.scale(1.0 / s);
    let d = m + n;
    let zero_m = ComplexMatrix::zeros(m, m);
    let zero_n = ComplexMatrix::zeros(n, n);
    let mut p = SdpProblem::new(d);
    p.set_objective(SparseHerm::from_dense(0, &ComplexMatrix::block_hermitian(&zero_m, &xn, &zero_n)));
    for k in 0..d {
        p.add_equality(SparseHerm::diag(0, k, 1.0), 0.5);
    }
    let sol = run(&p, cfg)?;

    let value = -sol.dual_value * s;
    let lower = -sol.primal_value * s;
    let scal: Vec<f64> = sol.multipliers.iter().map(|y| (-y).max(0.0) * s).collect();
    let z2 = sol.primal_dense(0).scale(2.0);
    let y = z2.submatrix(0, m, m, n).scale(-1.0);
    Ok(finish(
        kind,
        &sol,
        value,
        lower,
        PrimalWitness::Scalings {
            p: scal[..m].to_vec(),
            q: scal[m..].to_vec(),
        },
        DualWitness::Pairing {
            y,
            gram: Some(flip_off_blocks(&z2, m)),
        },
    ))
}

/// `||F_X||_cb = sqrt(min { sum v : diag(v) >= X^* X })`.
///
/// The pairing witness `Y` has `tx_cb(Y) <= 1`, proven by `gram`
/// `[[P, Y], [Y^*, Q]]` with `Tr P = 1` and `Q_jj = 1`.
pub fn fx_cb(x: &ComplexMatrix, cfg: &CbConfig) -> Result<NormCertificate> {
    fx_cb_kind(x, cfg, NormKind::cb(Interpretation::F))
}

fn fx_cb_kind(x: &ComplexMatrix, cfg: &CbConfig, kind: NormKind) -> Result<NormCertificate> {
    let (m, n) = x.shape();
    let s = hs_norm(x);
    if s == 0.0 {
        return Ok(NormCertificate::zero(kind, m, n));
    }
    let xn = x.scale(1.0 / s);
    // variable ordered as [n | m]: C = [[0, X^*], [X, I_m]]
    let c = ComplexMatrix::block_hermitian(&ComplexMatrix::zeros(n, n), &xn.adjoint(), &ComplexMatrix::identity(m));
    let mut p = SdpProblem::new(n + m);
    p.set_objective(SparseHerm::from_dense(0, &c));
    for k in 0..n {
        p.add_equality(SparseHerm::diag(0, k, 1.0), 1.0);
    }
    let sol = run(&p, cfg)?;

    let value = (-sol.dual_value).max(0.0).sqrt() * s;
    let v: Vec<f64> = sol.multipliers.iter().map(|y| (-y).max(0.0) * s * s).collect();
    let z = sol.primal_dense(0);
    let z21 = z.submatrix(n, 0, m, n);
    let tau = (0..m).map(|i| z[(n + i, n + i)].re).sum::<f64>().max(0.0).sqrt();
    let (y, lower, gram) = if tau > 0.0 {
        let y = z21.scale(-1.0 / tau);
        let lower = pairing_unchecked(&xn, &y).re * s;
        let p_block = z.submatrix(n, n, m, m).scale(1.0 / (tau * tau));
        let q_block = z.submatrix(0, 0, n, n);
        (y.clone(), lower, Some(ComplexMatrix::block_hermitian(&p_block, &y, &q_block)))
    } else {
        (ComplexMatrix::zeros(m, n), 0.0, None)
    };
    Ok(finish(kind, &sol, value, lower, PrimalWitness::Majorant { v }, DualWitness::Pairing { y, gram }))
}

/// `||G_X||_cb = ||F_{X^*}||_cb`; the majorant acts on `X X^*` and the
/// pairing witness is mapped back to the shape of `X`.
pub fn gx_cb(x: &ComplexMatrix, cfg: &CbConfig) -> Result<NormCertificate> {
    let mut cert = fx_cb_kind(&x.adjoint(), cfg, NormKind::cb(Interpretation::G))?;
    if let Some(DualWitness::Pairing { y, gram }) = &mut cert.dual_witness {
        *y = y.adjoint();
        *gram = None;
    }
    Ok(cert)
}

/// `||T_X||_cb = sqrt(min { Tr P : [[P, X], [X^*, Q]] >= 0, Q_jj <= 1 })`.
///
/// The pairing witness `Y` has `fx_cb(Y) <= 1`, proven by `gram`
/// `[[I, Y], [Y^*, diag(v)]]` with `sum v <= 1`. When `cfg.cross_check` is
/// set, `fx_cb(Y)` is solved independently and the implied value
/// `<X, Y> / fx_cb(Y)` is recorded in `meta.cross_check`.
pub fn tx_cb(x: &ComplexMatrix, cfg: &CbConfig) -> Result<NormCertificate> {
    let kind = NormKind::cb(Interpretation::T);
    let (m, n) = x.shape();
    let s = hs_norm(x);
    if s == 0.0 {
        return Ok(NormCertificate::zero(kind, m, n));
    }
    let xn = x.scale(1.0 / s);
    let mut p = SdpProblem::new(m + n);
    let mut c = SparseHerm::new();
    for i in 0..m {
        c.add_diag(0, i, 1.0);
    }
    p.set_objective(c);
    pin_off_block(&mut p, &xn, 0, m);
    for j in 0..n {
        p.add_equality(SparseHerm::diag(0, m + j, 1.0), 1.0);
    }
    let sol = run(&p, cfg)?;

    let value = sol.primal_value.max(0.0).sqrt() * s;
    let w = pinned_multipliers(&sol.multipliers, m, n).scale(0.5);
    let dvec: Vec<f64> = sol.multipliers[2 * m * n..].iter().map(|mu| -mu).collect();
    let delta = dvec.iter().sum::<f64>().max(0.0).sqrt();
    let (y, lower, gram) = if delta > 0.0 {
        let y = w.scale(1.0 / delta);
        let lower = pairing_unchecked(&xn, &y).re * s;
        let mut q = ComplexMatrix::zeros(n, n);
        for (j, dj) in dvec.iter().enumerate() {
            q[(j, j)] = Complex64::new(dj / (delta * delta), 0.0);
        }
        let gram = ComplexMatrix::block_hermitian(&ComplexMatrix::identity(m), &y, &q);
        (y, lower, Some(gram))
    } else {
        (ComplexMatrix::zeros(m, n), 0.0, None)
    };

    let mut zs = sol.primal_dense(0).clone();
    for i in 0..m + n {
        for j in 0..m + n {
            let f = if i < m { s } else { 1.0 } * if j < m { s } else { 1.0 };
            zs[(i, j)] *= f;
        }
    }
    let mut cert = finish(kind, &sol, value, lower, PrimalWitness::BlockGram { z: zs }, DualWitness::Pairing { y: y.clone(), gram });

    if cfg.cross_check && delta > 0.0 {
        let inner = CbConfig {
            cross_check: false,
            ..*cfg
        };
        let fx = fx_cb(&y, &inner)?;
        if fx.value > 0.0 {
            let implied = pairing_unchecked(x, &y).re / fx.value;
            cert.meta.cross_check = Some(implied);
            let mismatch = (implied - value).abs();
            if mismatch > 1e-5 * value.max(1.0) {
                log::warn!("tx_cb cross-check mismatch {mismatch:.3e} (value {value}, dual {implied})");
                cert.meta
                    .diagnostics
                    .push(format!("cross-check mismatch {mismatch:.3e} against the fx_cb dual"));
            }
        }
    }
    Ok(cert)
}

/// Vectors `a_s, b_s` (`s < l`) realising the amplified bilinear form:
/// `sum_s |a_s(i)|^2 <= 1`, `sum_s |b_s(j)|^2 <= 1` and
/// `sum_s B_X(a_s, b_s) = value`.
#[derive(Debug, Clone, Serialize)]
pub struct Amplification {
    pub a: Vec<ComplexVector>,
    pub b: Vec<ComplexVector>,
    pub value: Complex64,
}

impl Amplification {
    /// Amplification level `l` (number of terms).
    pub fn level(&self) -> usize {
        self.a.len()
    }

    /// Largest `sum_s |a_s(i)|^2` over `i` and `sum_s |b_s(j)|^2` over `j`.
    pub fn constraint_norms(&self) -> (f64, f64) {
        let worst = |v: &[ComplexVector]| {
            let dim = v.first().map_or(0, ComplexVector::dim);
            (0..dim)
                .map(|i| v.iter().map(|w| w[i].norm_sqr()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        (worst(&self.a), worst(&self.b))
    }
}

/// Turns the dual witness of [`bx_cb`] into `l <= min(m, n)` vector pairs
/// attaining `||B_X||_cb` in the amplified form.
pub fn amplification_witness(x: &ComplexMatrix, cert: &NormCertificate) -> Result<Amplification> {
    let (m, n) = x.shape();
    let gram = match (&cert.kind, &cert.dual_witness) {
        (k, Some(DualWitness::Pairing { gram: Some(g), .. })) if *k == NormKind::cb(Interpretation::B) => g,
        (_, Some(DualWitness::Pairing { gram: None, y })) if y.is_zero() => {
            return Ok(Amplification {
                a: Vec::new(),
                b: Vec::new(),
                value: Complex64::new(0.0, 0.0),
            })
        }
        _ => return Err(Error::Witness("expected a bx_cb certificate".into())),
    };
    if gram.rows() != m + n {
        return Err(Error::Witness(format!(
            "witness of size {} does not fit a {m}x{n} matrix",
            gram.rows()
        )));
    }
    let f = psd_factor(&gram.hermitian_part())?;
    let k = f.rows();
    let a_blk = f.submatrix(0, 0, k, m);
    let b_blk = f.submatrix(0, m, k, n);
    let (l, r) = rank_reduce(&a_blk.adjoint(), &b_blk)?;
    let level = l.cols();
    let a: Vec<ComplexVector> = (0..level)
        .map(|s| ComplexVector::from_vec((0..m).map(|i| l[(i, s)].conj()).collect()))
        .collect();
    let b: Vec<ComplexVector> = (0..level)
        .map(|s| ComplexVector::from_vec((0..n).map(|j| r[(s, j)].conj()).collect()))
        .collect();
    let mut value = Complex64::new(0.0, 0.0);
    for (av, bv) in a.iter().zip(&b) {
        value += apply_b(x, av, bv)?;
    }
    Ok(Amplification { a, b, value })
}
