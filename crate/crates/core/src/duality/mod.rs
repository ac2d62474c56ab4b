//! Numerical checks of the polar relations between the unit balls of the
//! classical and completely bounded norms, unit-ball membership, the trace
//! form of the Schur pairing, and searches for large cb/classical ratios.

mod hull;
mod polar;
mod ratio;

pub use hull::{hull_gauge, HullBracket};
pub use polar::{polar_check, polar_check_with, polar_pairing, Counterexample, PolarPairing, PolarRelation, PolarReport, PolarStats};
pub use ratio::{grothendieck_ratio, RatioConfig, RatioKind, RatioReport};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::norms::{bx_cb, bx_norm, fx_cb, gamma2, tx_cb, CbConfig, HeuristicConfig, NormCertificate};
use crate::rng;

/// The six unit balls: classical and cb bilinear forms (`B`, `CB`), the
/// closed convex hull of unimodular rank-one matrices (`S`), and the cb
/// balls of the Schur multiplier, linear map and trilinear map (`CS`, `CF`,
/// `CT`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BallKind {
    B,
    S,
    CB,
    CS,
    CF,
    CT,
}

impl fmt::Display for BallKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BallKind::B => "B",
            BallKind::S => "S",
            BallKind::CB => "CB",
            BallKind::CS => "CS",
            BallKind::CF => "CF",
            BallKind::CT => "CT",
        };
        f.write_str(s)
    }
}

impl FromStr for BallKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "B" => BallKind::B,
            "S" => BallKind::S,
            "CB" => BallKind::CB,
            "CS" => BallKind::CS,
            "CF" => BallKind::CF,
            "CT" => BallKind::CT,
            _ => return Err(Error::Config(format!("unknown ball '{s}' (expected B, S, CB, CS, CF or CT)"))),
        })
    }
}

/// Settings shared by the checks in this module.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LabConfig {
    pub cb: CbConfig,
    pub heuristic: HeuristicConfig,
}

impl LabConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            heuristic: HeuristicConfig::with_seed(seed),
            ..Self::default()
        }
    }
}

/// Outcome of a membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    /// The certified upper bound of the gauge is at most `1 + tol`.
    Inside,
    /// The certified lower bound exceeds `1 + tol`.
    Outside,
    /// The bracket straddles `1 + tol`; only the bounds are known.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub ball: BallKind,
    pub status: Membership,
    /// Certified bracket `[lower, upper]` for the gauge of the ball at `X`.
    pub lower: f64,
    pub upper: f64,
    pub tol: f64,
}

impl MembershipReport {
    pub fn bracket_width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Bracket `[lower, upper]` carried by a cb certificate.
pub(crate) fn cb_bracket(cert: &NormCertificate) -> (f64, f64) {
    let lower = cert.meta.lower_bound.unwrap_or(cert.value);
    (lower.min(cert.value), lower.max(cert.value))
}

/// Decides whether `X` lies in the unit ball `ball`, up to `tol`.
///
/// The cb balls are decided from the SDP bracket; `B` uses the classical
/// search as lower and `bx_cb` as upper bound; `S` uses [`hull_gauge`].
pub fn membership(x: &ComplexMatrix, ball: BallKind, tol: f64, cfg: &LabConfig) -> Result<MembershipReport> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("tolerance must be finite and non-negative, got {tol}")));
    }
    let (lower, upper) = match ball {
        BallKind::CS => cb_bracket(&gamma2(x, &cfg.cb)?),
        BallKind::CB => cb_bracket(&bx_cb(x, &cfg.cb)?),
        BallKind::CF => cb_bracket(&fx_cb(x, &cfg.cb)?),
        BallKind::CT => cb_bracket(&tx_cb(x, &cfg.cb)?),
        BallKind::B => {
            let lower = bx_norm(x, &cfg.heuristic)?.value;
            let upper = cb_bracket(&bx_cb(x, &cfg.cb)?).1;
            (lower, upper.max(lower))
        }
        BallKind::S => {
            let h = hull_gauge(x, cfg)?;
            (h.lower, h.upper)
        }
    };
    let status = if upper <= 1.0 + tol {
        Membership::Inside
    } else if lower > 1.0 + tol {
        Membership::Outside
    } else {
        Membership::Boundary
    };
    Ok(MembershipReport {
        ball,
        status,
        lower,
        upper,
        tol,
    })
}

/// Both sides of the trace form of the Schur pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingIdentity {
    /// `Tr(X^* diag(eta)^* C diag(xi))`.
    pub trace_side: Complex64,
    /// `<(conj(X) o C) xi, eta>`.
    pub schur_side: Complex64,
    /// `|trace_side - schur_side|` divided by `sum |X_ij C_ij xi_j eta_i|`.
    pub deviation: f64,
}

/// Evaluates `Tr(X^* diag(eta)^* C diag(xi))` through matrix products and
/// `<(conj(X) o C) xi, eta>` through the Schur product, and compares them.
pub fn pairing_identity_check(
    x: &ComplexMatrix,
    c: &ComplexMatrix,
    xi: &[Complex64],
    eta: &[Complex64],
) -> Result<PairingIdentity> {
    let (m, n) = x.shape();
    if c.shape() != (m, n) {
        return Err(Error::ShapeMismatch {
            left: (m, n),
            right: c.shape(),
        });
    }
    if xi.len() != n || eta.len() != m {
        return Err(Error::ShapeMismatch {
            left: (m, n),
            right: (eta.len(), xi.len()),
        });
    }
    let d_eta = ComplexMatrix::from_fn(m, m, |i, j| if i == j { eta[i] } else { Complex64::new(0.0, 0.0) });
    let d_xi = ComplexMatrix::from_fn(n, n, |i, j| if i == j { xi[i] } else { Complex64::new(0.0, 0.0) });
    let trace_side = x.adjoint().matmul(&d_eta.adjoint()).matmul(c).matmul(&d_xi).trace();

    let k = ComplexMatrix::from_fn(m, n, |i, j| x[(i, j)].conj() * c[(i, j)]);
    let schur_side: Complex64 = k.matvec(xi).iter().zip(eta).map(|(u, e)| u * e.conj()).sum();

    let mut scale = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            scale += x[(i, j)].norm() * c[(i, j)].norm() * xi[j].norm() * eta[i].norm();
        }
    }
    Ok(PairingIdentity {
        trace_side,
        schur_side,
        deviation: if scale > 0.0 {
            (trace_side - schur_side).norm() / scale
        } else {
            (trace_side - schur_side).norm()
        },
    })
}

/// Largest relative deviation of the pairing identity over `samples` random
/// complex instances of shape `m x n`.
pub fn pairing_identity_samples(m: usize, n: usize, samples: usize, seed: u64) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::Dimension(format!("pairing identity needs positive dimensions, got {m}x{n}")));
    }
    let mut worst = 0.0f64;
    for s in 0..samples {
        let mut g = rng::stream(seed, s as u64);
        let scale = 10f64.powf(g.random_range(-3.0..3.0));
        let x = rng::gaussian_matrix(&mut g, m, n, false).scale(scale);
        let c = rng::gaussian_matrix(&mut g, m, n, false);
        let xi: Vec<Complex64> = (0..n).map(|_| rng::complex_normal(&mut g)).collect();
        let eta: Vec<Complex64> = (0..m).map(|_| rng::complex_normal(&mut g)).collect();
        worst = worst.max(pairing_identity_check(&x, &c, &xi, &eta)?.deviation);
    }
    Ok(worst)
}
