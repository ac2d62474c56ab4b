//! Norm-optimal factorizations extracted from cb-norm certificates.
//!
//! | kind | shape                     | cost                         |
//! |------|---------------------------|------------------------------|
//! | F    | `X = C diag(xi)`          | `||C|| ||xi||_2`             |
//! | G    | `X = diag(eta) D`         | `||eta||_2 ||D||`            |
//! | B    | `X = diag(eta) C diag(xi)`| `||eta||_2 ||C|| ||xi||_2`   |
//! | S    | `X = L^* R`               | `||L||_c ||R||_c`            |
//! | T    | `X = diag(gamma) L^* R`   | `||gamma||_2 ||L||_c ||R||_c`|
//!
//! Scaling vectors are real and nonnegative; any phase is absorbed into the
//! middle factors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{col_norm, column_norms, hs_norm, op_norm, row_norms, scale_cols, scale_rows, ComplexMatrix, RankRule};
use crate::norms::{Interpretation, NormCertificate, NormKind, PrimalWitness};
use crate::sdp::psd_factor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FactorKind {
    F,
    G,
    B,
    S,
    T,
}

/// The named factors of a [`Factorization`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Factors {
    F { c: ComplexMatrix, xi: Vec<f64> },
    G { eta: Vec<f64>, d: ComplexMatrix },
    B { eta: Vec<f64>, c: ComplexMatrix, xi: Vec<f64> },
    S { l: ComplexMatrix, r: ComplexMatrix },
    T { gamma: Vec<f64>, l: ComplexMatrix, r: ComplexMatrix },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Factorization {
    pub kind: FactorKind,
    pub factors: Factors,
    #[serde(rename = "rank")]
    pub declared_rank: usize,
    pub cost: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `1 / w` on the support of `w`, zero elsewhere.
fn pinv(w: &[f64]) -> Vec<f64> {
    w.iter().map(|&x| if x > 0.0 { 1.0 / x } else { 0.0 }).collect()
}

impl Factorization {
    /// Product of the factors.
    pub fn reconstruct(&self) -> ComplexMatrix {
        match &self.factors {
            Factors::F { c, xi } => scale_cols(c, xi),
            Factors::G { eta, d } => scale_rows(d, eta),
            Factors::B { eta, c, xi } => scale_cols(&scale_rows(c, eta), xi),
            Factors::S { l, r } => l.adjoint_matmul(r),
            Factors::T { gamma, l, r } => scale_rows(&l.adjoint_matmul(r), gamma),
        }
    }

    /// Cost recomputed from the factors.
    pub fn factor_cost(&self) -> f64 {
        match &self.factors {
            Factors::F { c, xi } => op_norm(c) * norm2(xi),
            Factors::G { eta, d } => norm2(eta) * op_norm(d),
            Factors::B { eta, c, xi } => norm2(eta) * op_norm(c) * norm2(xi),
            Factors::S { l, r } => col_norm(l) * col_norm(r),
            Factors::T { gamma, l, r } => norm2(gamma) * col_norm(l) * col_norm(r),
        }
    }

    /// `||reconstruct() - X||_HS / max(||X||_HS, tiny)`.
    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        hs_norm(&(&self.reconstruct() - x)) / hs_norm(x).max(f64::MIN_POSITIVE)
    }

    fn new(kind: FactorKind, factors: Factors, declared_rank: usize) -> Self {
        let mut f = Self {
            kind,
            factors,
            declared_rank,
            cost: 0.0,
        };
        f.cost = f.factor_cost();
        f
    }
}

/// Splits `T = R diag(xi)` with `xi_j` the column norms of `T` and the
/// nonzero columns of `R` normalised.
pub fn scale_split(t: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>) {
    let xi = column_norms(t);
    let inv = pinv(&xi);
    (scale_cols(t, &inv), xi)
}

/// Rank reduction: `L R = A B` with `r = rank(AB)` columns in `L`, and none
/// of the row, column, operator or Hilbert-Schmidt norms of `L` (resp. `R`)
/// larger than those of `A` (resp. `B`).
pub fn rank_reduce(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    rank_reduce_with(a, b, RankRule::default())
}

pub fn rank_reduce_with(a: &ComplexMatrix, b: &ComplexMatrix, rule: RankRule) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if a.cols() != b.rows() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    if k == 0 {
        return Ok((ComplexMatrix::zeros(m, 0), ComplexMatrix::zeros(0, n)));
    }
    let ab = a.matmul(b);
    let r = rule.rank(&ab);
    if r == 0 {
        return Ok((ComplexMatrix::zeros(m, 0), ComplexMatrix::zeros(0, n)));
    }
    // range projection of B
    let sb = b.svd();
    let rb = rule.count(&sb.sigma, k.max(n));
    let ub: Vec<usize> = (0..rb).collect();
    let u = sb.u.select_columns(&ub);
    let e = u.matmul(&u.adjoint());
    // support of A E: its leading right singular vectors
    let sae = a.matmul(&e).svd();
    let w = sae.v.select_columns(&(0..r).collect::<Vec<_>>());
    Ok((a.matmul(&w), w.adjoint_matmul(b)))
}

fn expect_kind(cert: &NormCertificate, map: Interpretation, x: &ComplexMatrix) -> Result<()> {
    if cert.kind != NormKind::cb(map) {
        return Err(Error::Witness(format!("expected a {} certificate, got {}", NormKind::cb(map), cert.kind)));
    }
    if let Some(y) = cert.pairing_matrix() {
        if y.shape() != x.shape() {
            return Err(Error::Witness("certificate was computed for a different shape".into()));
        }
    }
    Ok(())
}

fn block_gram(cert: &NormCertificate, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    match &cert.primal_witness {
        Some(PrimalWitness::BlockGram { z }) if z.rows() == x.rows() + x.cols() => Ok(z.clone()),
        _ => Err(Error::Witness("certificate lacks a block Gram witness".into())),
    }
}

/// Gram factor `[A B]` of a block witness, with `A^* B ~ X`.
fn gram_halves(z: &ComplexMatrix, m: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let f = psd_factor(&z.hermitian_part())?;
    let k = f.rows();
    let n = z.rows() - m;
    Ok((f.submatrix(0, 0, k, m), f.submatrix(0, m, k, n)))
}

/// `X = L^* R` with `||L||_c ||R||_c = gamma2(X)` and `rank L = rank R = rank X`.
pub fn schur_factor(x: &ComplexMatrix, cert: &NormCertificate) -> Result<Factorization> {
    expect_kind(cert, Interpretation::S, x)?;
    let (m, n) = x.shape();
    if x.is_zero() {
        return Ok(Factorization::new(
            FactorKind::S,
            Factors::S {
                l: ComplexMatrix::zeros(0, m),
                r: ComplexMatrix::zeros(0, n),
            },
            0,
        ));
    }
    let z = block_gram(cert, x)?;
    let (a, b) = gram_halves(&z, m)?;
    let (lt, r) = rank_reduce(&a.adjoint(), &b)?;
    let mut l = lt.adjoint();
    let mut r = r;
    let (cl, cr) = (col_norm(&l), col_norm(&r));
    if cl > 0.0 && cr > 0.0 {
        let s = (cr / cl).sqrt();
        l = l.scale(s);
        r = r.scale(1.0 / s);
    }
    let rank = r.rows();
    Ok(Factorization::new(FactorKind::S, Factors::S { l, r }, rank))
}

/// `X = diag(gamma) L^* R` with unit `gamma`, unit-norm columns in `L` and
/// `||R||_c = tx_cb(X)`.
pub fn tx_factor(x: &ComplexMatrix, cert: &NormCertificate) -> Result<Factorization> {
    expect_kind(cert, Interpretation::T, x)?;
    let (m, n) = x.shape();
    if x.is_zero() {
        return Ok(Factorization::new(
            FactorKind::T,
            Factors::T {
                gamma: vec![0.0; m],
                l: ComplexMatrix::zeros(0, m),
                r: ComplexMatrix::zeros(0, n),
            },
            0,
        ));
    }
    let z = block_gram(cert, x)?;
    let (a, b) = gram_halves(&z, m)?;
    let (lp, r) = rank_reduce(&a.adjoint(), &b)?;
    // lp = diag(gamma) L^*: split the rows of lp
    let (l, gamma) = scale_split(&lp.adjoint());
    let g = norm2(&gamma);
    let (gamma, r) = if g > 0.0 {
        (gamma.iter().map(|v| v / g).collect(), r.scale(g))
    } else {
        (gamma, r)
    };
    let rank = r.rows();
    Ok(Factorization::new(FactorKind::T, Factors::T { gamma, l, r }, rank))
}

fn majorant(cert: &NormCertificate, len: usize) -> Result<Vec<f64>> {
    match &cert.primal_witness {
        Some(PrimalWitness::Majorant { v }) if v.len() == len => Ok(v.clone()),
        _ => Err(Error::Witness("certificate lacks a diagonal majorant".into())),
    }
}

/// Scaling from a majorant: `sqrt(max(v_j, |x_j|^2))`, unit-normalised,
/// zero where `x_j = 0`.
fn scaling_from_majorant(v: &[f64], norms: &[f64]) -> Vec<f64> {
    let raw: Vec<f64> = v
        .iter()
        .zip(norms)
        .map(|(&vj, &nj)| if nj > 0.0 { vj.max(nj * nj).sqrt() } else { 0.0 })
        .collect();
    let s = norm2(&raw);
    raw.iter().map(|r| r / s).collect()
}

fn unit_first(len: usize) -> Vec<f64> {
    let mut e = vec![0.0; len];
    e[0] = 1.0;
    e
}

/// `X = C diag(xi)` with `||xi||_2 = 1` and `||C|| = fx_cb(X)`.
pub fn fx_factor(x: &ComplexMatrix, cert: &NormCertificate) -> Result<Factorization> {
    expect_kind(cert, Interpretation::F, x)?;
    let (m, n) = x.shape();
    if x.is_zero() {
        return Ok(Factorization::new(
            FactorKind::F,
            Factors::F {
                c: ComplexMatrix::zeros(m, n),
                xi: unit_first(n),
            },
            0,
        ));
    }
    let v = majorant(cert, n)?;
    let xi = scaling_from_majorant(&v, &column_norms(x));
    let c = scale_cols(x, &pinv(&xi));
    let rank = c.rank();
    Ok(Factorization::new(FactorKind::F, Factors::F { c, xi }, rank))
}

/// `X = diag(eta) D` with `||eta||_2 = 1` and `||D|| = gx_cb(X)`.
pub fn gx_factor(x: &ComplexMatrix, cert: &NormCertificate) -> Result<Factorization> {
    expect_kind(cert, Interpretation::G, x)?;
    let (m, n) = x.shape();
    if x.is_zero() {
        return Ok(Factorization::new(
            FactorKind::G,
            Factors::G {
                eta: unit_first(m),
                d: ComplexMatrix::zeros(m, n),
            },
            0,
        ));
    }
    let v = majorant(cert, m)?;
    let eta = scaling_from_majorant(&v, &row_norms(x));
    let d = scale_rows(x, &pinv(&eta));
    let rank = d.rank();
    Ok(Factorization::new(FactorKind::G, Factors::G { eta, d }, rank))
}

/// `X = diag(eta) C diag(xi)` with unit `eta, xi` and `||C|| = bx_cb(X)`.
pub fn bilinear_factor(x: &ComplexMatrix, cert: &NormCertificate) -> Result<Factorization> {
    expect_kind(cert, Interpretation::B, x)?;
    let (m, n) = x.shape();
    if x.is_zero() {
        return Ok(Factorization::new(
            FactorKind::B,
            Factors::B {
                eta: unit_first(m),
                c: ComplexMatrix::zeros(m, n),
                xi: unit_first(n),
            },
            0,
        ));
    }
    let (p, q) = match &cert.primal_witness {
        Some(PrimalWitness::Scalings { p, q }) if p.len() == m && q.len() == n => (p, q),
        _ => return Err(Error::Witness("certificate lacks diagonal scalings".into())),
    };
    let rows = row_norms(x);
    let cols = column_norms(x);
    let eta_raw: Vec<f64> = p.iter().zip(&rows).map(|(&pi, &ri)| if ri > 0.0 { pi.max(0.0).sqrt() } else { 0.0 }).collect();
    let xi_raw: Vec<f64> = q.iter().zip(&cols).map(|(&qj, &cj)| if cj > 0.0 { qj.max(0.0).sqrt() } else { 0.0 }).collect();
    if eta_raw.iter().zip(&rows).any(|(e, r)| *r > 0.0 && *e == 0.0)
        || xi_raw.iter().zip(&cols).any(|(e, c)| *c > 0.0 && *e == 0.0)
    {
        return Err(Error::Witness("scalings vanish on the support of X".into()));
    }
    let (ne, nx) = (norm2(&eta_raw), norm2(&xi_raw));
    let c = scale_cols(&scale_rows(x, &pinv(&eta_raw)), &pinv(&xi_raw)).scale(ne * nx);
    let eta = eta_raw.iter().map(|v| v / ne).collect();
    let xi = xi_raw.iter().map(|v| v / nx).collect();
    let rank = c.rank();
    Ok(Factorization::new(FactorKind::B, Factors::B { eta, c, xi }, rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::row_norm;
    use num_complex::Complex64;
    use crate::norms::{bx_cb, fx_cb, gamma2, gx_cb, tx_cb, CbConfig};
    use proptest::prelude::*;

    fn real(m: usize, n: usize, v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real(m, n, v).unwrap()
    }

    fn cfg() -> CbConfig {
        CbConfig::default()
    }

    #[test]
    fn rank_reduce_examples() {
        let a = real(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let b = real(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let (l, r) = rank_reduce(&a, &b).unwrap();
        assert_eq!((l.shape(), r.shape()), ((2, 1), (1, 2)));
        assert!(l.matmul(&r).relative_distance(&ComplexMatrix::ones(2, 2)) < 1e-14);
        // L = [[1],[1]] and R = [[1, 1]] up to a common phase
        assert!((l[(0, 0)].norm() - 1.0).abs() < 1e-14 && (r[(0, 1)].norm() - 1.0).abs() < 1e-14);

        let i2 = ComplexMatrix::identity(2);
        let (l, r) = rank_reduce(&i2, &i2).unwrap();
        assert_eq!(l.cols(), 2);
        assert!(l.matmul(&r).relative_distance(&i2) < 1e-14);

        let (l, r) = rank_reduce(&i2, &ComplexMatrix::zeros(2, 3)).unwrap();
        assert_eq!((l.shape(), r.shape()), ((2, 0), (0, 3)));
    }

    #[test]
    fn scale_split_examples() {
        let (r, xi) = scale_split(&real(2, 2, &[0.6, 0.0, 0.8, 0.0]));
        assert_eq!(xi, vec![1.0, 0.0]);
        assert_eq!(r, real(2, 2, &[0.6, 0.0, 0.8, 0.0]));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (r, xi) = scale_split(&ComplexMatrix::identity(2).scale(h));
        assert!(r.relative_distance(&ComplexMatrix::identity(2)) < 1e-15);
        assert!((xi[0] - h).abs() < 1e-15 && (xi[1] - h).abs() < 1e-15);
        let (r, xi) = scale_split(&real(1, 2, &[0.6, 0.8]));
        assert_eq!(r, real(1, 2, &[1.0, 1.0]));
        assert_eq!(xi, vec![0.6, 0.8]);
    }

    #[test]
    fn schur_factor_examples() {
        let i2 = ComplexMatrix::identity(2);
        let f = schur_factor(&i2, &gamma2(&i2, &cfg()).unwrap()).unwrap();
        assert!((f.cost - 1.0).abs() < 1e-7);
        assert_eq!(f.declared_rank, 2);
        assert!(f.residual(&i2) < 1e-7);

        let u = [Complex64::from_polar(1.0, 0.3), Complex64::from_polar(1.0, -1.1)];
        let v = [Complex64::from_polar(1.0, 2.0), Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, 0.7)];
        let x = ComplexMatrix::from_fn(2, 3, |i, j| u[i].conj() * v[j]);
        let f = schur_factor(&x, &gamma2(&x, &cfg()).unwrap()).unwrap();
        assert_eq!(f.declared_rank, 1);
        assert!((f.cost - 1.0).abs() < 1e-7);
        assert!(f.residual(&x) < 1e-7);

        let h2 = real(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let f = schur_factor(&h2, &gamma2(&h2, &cfg()).unwrap()).unwrap();
        assert_eq!(f.declared_rank, 2);
        assert!((f.cost - 2f64.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn fx_factor_examples() {
        let x = real(1, 2, &[1.0, 1.0]);
        let f = fx_factor(&x, &fx_cb(&x, &cfg()).unwrap()).unwrap();
        let Factors::F { c, xi } = &f.factors else { panic!() };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((xi[0] - h).abs() < 1e-7 && (xi[1] - h).abs() < 1e-7);
        assert!(c.relative_distance(&real(1, 2, &[2f64.sqrt(), 2f64.sqrt()])) < 1e-7);
        assert!((f.cost - 2.0).abs() < 1e-7);

        let i2 = ComplexMatrix::identity(2);
        let f = fx_factor(&i2, &fx_cb(&i2, &cfg()).unwrap()).unwrap();
        let Factors::F { c, .. } = &f.factors else { panic!() };
        assert!(c.relative_distance(&i2.scale(2f64.sqrt())) < 1e-7);

        let z = ComplexMatrix::zeros(2, 2);
        let f = fx_factor(&z, &fx_cb(&z, &cfg()).unwrap()).unwrap();
        assert!(f.reconstruct().is_zero());
        let Factors::F { xi, .. } = &f.factors else { panic!() };
        assert!((norm2(xi) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gx_factor_reconstructs() {
        let x = ComplexMatrix::from_fn(3, 2, |i, j| Complex64::new(i as f64 - j as f64, 0.5));
        let cert = gx_cb(&x, &cfg()).unwrap();
        let f = gx_factor(&x, &cert).unwrap();
        assert!(f.residual(&x) < 1e-7);
        assert!((f.cost - cert.value).abs() < 1e-5);
    }

    #[test]
    fn bilinear_factor_examples() {
        let j = ComplexMatrix::ones(2, 2);
        let f = bilinear_factor(&j, &bx_cb(&j, &cfg()).unwrap()).unwrap();
        let Factors::B { eta, c, xi } = &f.factors else { panic!() };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(eta.iter().chain(xi).all(|v| (v - h).abs() < 1e-6));
        // unit scalings carry the norm into the middle factor: C = 2 J
        assert!(c.relative_distance(&j.scale(2.0)) < 1e-6);
        assert!((f.cost - 4.0).abs() < 1e-6);
        assert!(f.residual(&j) < 1e-7);

        let z = ComplexMatrix::zeros(2, 2);
        assert!(bilinear_factor(&z, &bx_cb(&z, &cfg()).unwrap()).unwrap().reconstruct().is_zero());

        let h2 = real(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let f = bilinear_factor(&h2, &bx_cb(&h2, &cfg()).unwrap()).unwrap();
        assert!((f.cost - 2.0 * 2f64.sqrt()).abs() < 1e-6);
        assert!(f.residual(&h2) < 1e-7);
    }

    #[test]
    fn tx_factor_examples() {
        let e11 = ComplexMatrix::unit(2, 3, 0, 0);
        let f = tx_factor(&e11, &tx_cb(&e11, &cfg()).unwrap()).unwrap();
        assert_eq!(f.declared_rank, 1);
        assert!((f.cost - 1.0).abs() < 1e-7);
        assert!(f.residual(&e11) < 1e-7);
        let Factors::T { gamma, .. } = &f.factors else { panic!() };
        assert!((gamma[0] - 1.0).abs() < 1e-7);

        let z = ComplexMatrix::zeros(2, 2);
        let f = tx_factor(&z, &tx_cb(&z, &cfg()).unwrap()).unwrap();
        assert_eq!(f.declared_rank, 0);

        let g0 = [0.6, 0.8];
        let x = real(2, 2, &[g0[0], 0.0, 0.0, g0[1]]);
        let f = tx_factor(&x, &tx_cb(&x, &cfg()).unwrap()).unwrap();
        assert!((f.cost - 1.0).abs() < 1e-6);
        assert!(f.residual(&x) < 1e-7);
    }

    #[test]
    fn wrong_certificate_is_rejected() {
        let x = ComplexMatrix::identity(2);
        let c = bx_cb(&x, &cfg()).unwrap();
        assert!(matches!(schur_factor(&x, &c), Err(Error::Witness(_))));
        assert!(matches!(fx_factor(&x, &c), Err(Error::Witness(_))));
    }

    #[test]
    fn factorization_json_shape() {
        let x = ComplexMatrix::identity(2);
        let f = schur_factor(&x, &gamma2(&x, &cfg()).unwrap()).unwrap();
        let v = serde_json::to_value(&f).unwrap();
        let obj = v.as_object().unwrap();
        let mut keys: Vec<_> = obj.keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["cost", "factors", "kind", "rank"]);
        assert!(obj["factors"].get("l").is_some() && obj["factors"].get("r").is_some());
    }

    fn matrix_strategy(max: usize) -> impl Strategy<Value = ComplexMatrix> {
        (1..=max, 1..=max).prop_flat_map(|(m, n)| {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), m * n).prop_map(move |v| {
                ComplexMatrix::from_row_major(m, n, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn rank_reduce_is_monotone(
            (a, b) in (1usize..6, 1usize..6, 1usize..6, 0usize..4).prop_flat_map(|(m, k, n, drop)| {
                let entries = |len: usize| proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len);
                (entries(m * k), entries(k * n)).prop_map(move |(va, vb)| {
                    let mk = |r, c, v: Vec<(f64, f64)>| ComplexMatrix::from_row_major(r, c, v.into_iter().map(|(x, y)| Complex64::new(x, y)).collect()).unwrap();
                    let mut b = mk(k, n, vb);
                    // make B rank deficient by zeroing some rows
                    for i in 0..drop.min(k.saturating_sub(1)) {
                        for j in 0..n { b[(i, j)] = Complex64::new(0.0, 0.0); }
                    }
                    (mk(m, k, va), b)
                })
            })
        ) {
            let (l, r) = rank_reduce(&a, &b).unwrap();
            let ab = a.matmul(&b);
            prop_assert!(hs_norm(&(&l.matmul(&r) - &ab)) <= 1e-8 * hs_norm(&ab).max(1e-300) + 1e-12);
            prop_assert_eq!(l.cols(), ab.rank());
            let t = 1e-9;
            prop_assert!(op_norm(&l) <= op_norm(&a) + t && op_norm(&r) <= op_norm(&b) + t);
            prop_assert!(hs_norm(&l) <= hs_norm(&a) + t && hs_norm(&r) <= hs_norm(&b) + t);
            prop_assert!(row_norm(&l) <= row_norm(&a) + t && col_norm(&r) <= col_norm(&b) + t);
        }

        #[test]
        fn scale_split_roundtrip(t in matrix_strategy(5)) {
            let (r, xi) = scale_split(&t);
            prop_assert!(hs_norm(&(&scale_cols(&r, &xi) - &t)) <= 1e-12 * hs_norm(&t).max(1.0));
            prop_assert!((norm2(&xi) - hs_norm(&t)).abs() <= 1e-12);
            let (r2, xi2) = scale_split(&r);
            prop_assert!(hs_norm(&(&r2 - &r)) <= 1e-12);
            prop_assert!(xi2.iter().all(|v| *v == 0.0 || (v - 1.0).abs() < 1e-12));
        }
    }
}
