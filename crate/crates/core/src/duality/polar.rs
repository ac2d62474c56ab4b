//! Sampled checks of the polar relations `B° = S`, `CB° = CS`, `CF° = CT`
//! under the pairing `<X, Y> = Tr(Y^* X)`.

use rayon::prelude::*;
use serde::Serialize;

use super::{cb_bracket, hull_gauge, LabConfig};
use crate::error::{Error, Result};
use crate::matrix::{pairing_unchecked, ComplexMatrix};
use crate::norms::{bx_cb, fx_cb, gamma2, tx_cb, CbConfig, NormCertificate};
use crate::rng;

/// Largest dimension accepted by [`polar_check`].
pub const MAX_POLAR_DIM: usize = 16;
/// Allowed excess of a normalised pairing over 1.
pub const PAIRING_TOL: f64 = 1e-6;
/// Allowed relative shortfall of a dual witness against the norm it certifies.
pub const SHARPNESS_TOL: f64 = 1e-5;

/// A pair of mutually polar unit balls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PolarRelation {
    /// Classical bilinear ball against the unimodular rank-one hull.
    #[serde(rename = "B-S")]
    BilinearHull,
    /// cb bilinear ball against the Schur multiplier ball.
    #[serde(rename = "CB-CS")]
    BilinearSchur,
    /// cb linear-map ball against the cb trilinear ball.
    #[serde(rename = "CF-CT")]
    LinearTrilinear,
}

impl PolarRelation {
    pub const ALL: [PolarRelation; 3] = [
        PolarRelation::BilinearHull,
        PolarRelation::BilinearSchur,
        PolarRelation::LinearTrilinear,
    ];
}

/// `|<X, Y>|` together with certified upper bounds of the two gauges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarPairing {
    pub pairing: f64,
    pub left_gauge: f64,
    pub right_gauge: f64,
    /// `pairing / (left_gauge * right_gauge)`, zero if either gauge is.
    pub normalized: f64,
}

fn upper(cert: &NormCertificate) -> f64 {
    cb_bracket(cert).1
}

fn no_cross_check(cfg: &LabConfig) -> CbConfig {
    CbConfig {
        cross_check: false,
        ..cfg.cb
    }
}

/// Pairs `X` (left ball of `relation`) with `Y` (right ball), both
/// normalised by certified gauge upper bounds, so a value above 1 would
/// contradict the polar relation.
pub fn polar_pairing(relation: PolarRelation, x: &ComplexMatrix, y: &ComplexMatrix, cfg: &LabConfig) -> Result<PolarPairing> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch {
            left: x.shape(),
            right: y.shape(),
        });
    }
    let cb = no_cross_check(cfg);
    let (left, right) = match relation {
        PolarRelation::BilinearHull => (upper(&bx_cb(x, &cb)?), hull_gauge(y, cfg)?.upper),
        PolarRelation::BilinearSchur => (upper(&bx_cb(x, &cb)?), upper(&gamma2(y, &cb)?)),
        PolarRelation::LinearTrilinear => (upper(&fx_cb(x, &cb)?), upper(&tx_cb(y, &cb)?)),
    };
    let pairing = pairing_unchecked(x, y).norm();
    let normalized = if left > 0.0 && right > 0.0 { pairing / (left * right) } else { 0.0 };
    Ok(PolarPairing {
        pairing,
        left_gauge: left,
        right_gauge: right,
        normalized,
    })
}

/// Aggregates for one relation over all samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarStats {
    pub relation: PolarRelation,
    /// Largest normalised pairing seen (sampled pairs and dual witnesses).
    pub max_pairing: f64,
    /// Largest relative shortfall `1 - |<X, Y*>| / (norm(X) gauge(Y*))` of a
    /// dual witness `Y*`; not defined for the hull relation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_sharpness_deficit: Option<f64>,
    /// Largest relative width of the hull gauge bracket.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_bracket_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub relation: PolarRelation,
    pub sample: usize,
    /// `"pairing"` or `"sharpness"`.
    pub check: &'static str,
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarReport {
    pub dims: (usize, usize),
    pub samples: usize,
    pub seed: u64,
    pub stats: Vec<PolarStats>,
    pub violations: Vec<Counterexample>,
}

impl PolarReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn stats_for(&self, relation: PolarRelation) -> Option<&PolarStats> {
        self.stats.iter().find(|s| s.relation == relation)
    }
}

/// Per-sample measurements for one relation.
struct Outcome {
    pairings: Vec<(f64, ComplexMatrix, ComplexMatrix)>,
    deficits: Vec<(f64, ComplexMatrix, ComplexMatrix)>,
    bracket_width: Option<f64>,
}

/// Shortfall of the witness `w` of `cert` (the norm of `x`), with `w`
/// measured by the independent gauge `gauge_w`.
fn witness_check(
    x: &ComplexMatrix,
    cert: &NormCertificate,
    gauge_w: impl Fn(&ComplexMatrix) -> Result<f64>,
    out: &mut Outcome,
) -> Result<()> {
    let Some(w) = cert.pairing_matrix() else {
        return Ok(());
    };
    let norm = upper(cert);
    if norm == 0.0 {
        return Ok(());
    }
    let g = gauge_w(w)?;
    let achieved = if g > 0.0 { pairing_unchecked(x, w).norm() / g } else { 0.0 };
    out.pairings.push((achieved / norm, x.clone(), w.clone()));
    out.deficits.push((1.0 - achieved / norm, x.clone(), w.clone()));
    Ok(())
}

fn sample_relation(relation: PolarRelation, x: &ComplexMatrix, y: &ComplexMatrix, cfg: &LabConfig) -> Result<Outcome> {
    let cb = no_cross_check(cfg);
    let mut out = Outcome {
        pairings: Vec::new(),
        deficits: Vec::new(),
        bracket_width: None,
    };
    match relation {
        PolarRelation::BilinearHull => {
            let left = upper(&bx_cb(x, &cb)?);
            let h = hull_gauge(y, cfg)?;
            let pairing = pairing_unchecked(x, y).norm();
            let normalized = if left > 0.0 && h.upper > 0.0 { pairing / (left * h.upper) } else { 0.0 };
            out.pairings.push((normalized, x.clone(), y.clone()));
            if h.upper > 0.0 {
                out.bracket_width = Some(h.width() / h.upper);
            }
        }
        PolarRelation::BilinearSchur => {
            let bx = bx_cb(x, &cb)?;
            let g = gamma2(y, &cb)?;
            let pairing = pairing_unchecked(x, y).norm();
            let denom = upper(&bx) * upper(&g);
            out.pairings.push((if denom > 0.0 { pairing / denom } else { 0.0 }, x.clone(), y.clone()));
            witness_check(x, &bx, |w| Ok(upper(&gamma2(w, &cb)?)), &mut out)?;
            witness_check(y, &g, |w| Ok(upper(&bx_cb(w, &cb)?)), &mut out)?;
        }
        PolarRelation::LinearTrilinear => {
            let f = fx_cb(x, &cb)?;
            let t = tx_cb(y, &cb)?;
            let pairing = pairing_unchecked(x, y).norm();
            let denom = upper(&f) * upper(&t);
            out.pairings.push((if denom > 0.0 { pairing / denom } else { 0.0 }, x.clone(), y.clone()));
            witness_check(x, &f, |w| Ok(upper(&tx_cb(w, &cb)?)), &mut out)?;
            witness_check(y, &t, |w| Ok(upper(&fx_cb(w, &cb)?)), &mut out)?;
        }
    }
    Ok(out)
}

/// [`polar_check_with`] over all three relations and default settings.
pub fn polar_check(m: usize, n: usize, samples: usize, seed: u64) -> Result<PolarReport> {
    polar_check_with(m, n, samples, seed, &PolarRelation::ALL, &LabConfig::with_seed(seed))
}

/// Samples complex Gaussian pairs `(X, Y)` and checks, for every relation,
/// that the normalised pairing stays below `1 + PAIRING_TOL`; for the cb
/// relations it also checks that each SDP dual witness attains the norm it
/// certifies to `SHARPNESS_TOL`, measuring the witness with the opposite
/// program.
pub fn polar_check_with(
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
    relations: &[PolarRelation],
    cfg: &LabConfig,
) -> Result<PolarReport> {
    if m == 0 || n == 0 || m > MAX_POLAR_DIM || n > MAX_POLAR_DIM {
        return Err(Error::Dimension(format!(
            "polar check needs 1 <= m, n <= {MAX_POLAR_DIM}, got {m}x{n}"
        )));
    }
    let outcomes: Vec<Vec<Outcome>> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut g = rng::stream(seed, s as u64);
            let x = rng::gaussian_matrix(&mut g, m, n, false);
            let y = rng::gaussian_matrix(&mut g, m, n, false);
            relations.iter().map(|&r| sample_relation(r, &x, &y, cfg)).collect()
        })
        .collect::<Result<_>>()?;

    let mut stats = Vec::new();
    let mut violations = Vec::new();
    for (ri, &relation) in relations.iter().enumerate() {
        let mut st = PolarStats {
            relation,
            max_pairing: 0.0,
            max_sharpness_deficit: (relation != PolarRelation::BilinearHull).then_some(0.0),
            max_bracket_width: (relation == PolarRelation::BilinearHull).then_some(0.0),
        };
        for (sample, per) in outcomes.iter().enumerate() {
            let o = &per[ri];
            for (v, x, y) in &o.pairings {
                st.max_pairing = st.max_pairing.max(*v);
                if *v > 1.0 + PAIRING_TOL {
                    violations.push(Counterexample {
                        relation,
                        sample,
                        check: "pairing",
                        x: x.clone(),
                        y: y.clone(),
                        value: *v,
                        bound: 1.0 + PAIRING_TOL,
                    });
                }
            }
            for (d, x, y) in &o.deficits {
                if let Some(worst) = st.max_sharpness_deficit.as_mut() {
                    *worst = worst.max(*d);
                }
                if *d > SHARPNESS_TOL {
                    violations.push(Counterexample {
                        relation,
                        sample,
                        check: "sharpness",
                        x: x.clone(),
                        y: y.clone(),
                        value: *d,
                        bound: SHARPNESS_TOL,
                    });
                }
            }
            if let (Some(w), Some(worst)) = (o.bracket_width, st.max_bracket_width.as_mut()) {
                *worst = worst.max(w);
            }
        }
        stats.push(st);
    }
    Ok(PolarReport {
        dims: (m, n),
        samples,
        seed,
        stats,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h2() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, -1.0]).unwrap()
    }

    #[test]
    fn hadamard_sits_on_the_cb_boundary() {
        let x = h2().scale(1.0 / (2.0 * 2f64.sqrt()));
        let p = polar_pairing(PolarRelation::BilinearSchur, &x, &h2(), &LabConfig::default()).unwrap();
        assert!((p.left_gauge - 1.0).abs() < 1e-6);
        assert!((p.right_gauge - 2f64.sqrt()).abs() < 1e-6);
        assert!((p.normalized - 1.0).abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn zero_pairs_to_zero() {
        let z = ComplexMatrix::zeros(2, 3);
        let y = ComplexMatrix::ones(2, 3);
        for r in PolarRelation::ALL {
            let p = polar_pairing(r, &z, &y, &LabConfig::default()).unwrap();
            assert_eq!(p.normalized, 0.0);
        }
    }

    #[test]
    fn unit_matrix_on_linear_trilinear_boundary() {
        let e = ComplexMatrix::unit(2, 2, 0, 0);
        let p = polar_pairing(PolarRelation::LinearTrilinear, &e, &e, &LabConfig::default()).unwrap();
        assert!((p.left_gauge - 1.0).abs() < 1e-6);
        assert!((p.right_gauge - 1.0).abs() < 1e-6);
        assert!((p.normalized - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sampled_relations_hold() {
        let report = polar_check(3, 3, 4, 11).unwrap();
        assert!(report.passed(), "{:#?}", report.violations);
        assert_eq!(report.stats.len(), 3);
        let cb = report.stats_for(PolarRelation::BilinearSchur).unwrap();
        assert!(cb.max_sharpness_deficit.unwrap() <= SHARPNESS_TOL);
    }

    #[test]
    fn rejects_large_dimensions() {
        assert!(polar_check(17, 2, 1, 0).is_err());
    }
}
