//! The four interpretations of a matrix and their classical and completely
//! bounded norms.
//!
//! The cb norms come out of small semidefinite programs and carry two-sided
//! certificates; the classical norms (apart from `S`, whose classical and cb
//! norms coincide) are computed by seeded multistart ascent and only certify
//! lower bounds.

mod cb;
mod classical;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::Error;
use crate::matrix::{ComplexMatrix, ComplexVector};
use crate::sdp::{SdpSettings, SdpStatus};

pub use cb::{amplification_witness, bx_cb, fx_cb, gamma2, gx_cb, tx_cb, Amplification};
pub use classical::{bx_norm, fx_norm, gx_norm, schur_norm_lb, tx_norm};

/// Default relative gap for the cb-norm programs. Tighter than the solver
/// default because the certificates feed factorization costs that are
/// compared to `1e-8`.
pub const DEFAULT_CB_TOL: f64 = 1e-10;

/// The operator a matrix `X` is read as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interpretation {
    /// `F_X(a) = X a` on `l_inf^n -> l_2^m`.
    F,
    /// `G_X(a) = a^T X` on `l_inf^m -> l_2^n`.
    G,
    /// Bilinear form `B_X(a, b) = a^T X b`.
    B,
    /// Schur multiplier `S_X(A) = X o A`.
    S,
    /// Mixed bilinear map `T_X(a, B) = (X o B)^T a`.
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    Classical,
    Cb,
}

/// Which norm a certificate is about, written `S-cb`, `B-classical`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NormKind {
    pub map: Interpretation,
    pub flavor: Flavor,
}

impl NormKind {
    pub const fn new(map: Interpretation, flavor: Flavor) -> Self {
        Self { map, flavor }
    }

    pub const fn cb(map: Interpretation) -> Self {
        Self::new(map, Flavor::Cb)
    }

    pub const fn classical(map: Interpretation) -> Self {
        Self::new(map, Flavor::Classical)
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let map = match self.map {
            Interpretation::F => "F",
            Interpretation::G => "G",
            Interpretation::B => "B",
            Interpretation::S => "S",
            Interpretation::T => "T",
        };
        let flavor = match self.flavor {
            Flavor::Classical => "classical",
            Flavor::Cb => "cb",
        };
        write!(f, "{map}-{flavor}")
    }
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("unknown norm kind '{s}' (expected e.g. S-cb, B-classical)"));
        let (map, flavor) = s.split_once('-').ok_or_else(bad)?;
        let map = match map.to_ascii_uppercase().as_str() {
            "F" => Interpretation::F,
            "G" => Interpretation::G,
            "B" => Interpretation::B,
            "S" => Interpretation::S,
            "T" => Interpretation::T,
            _ => return Err(bad()),
        };
        let flavor = match flavor.to_ascii_lowercase().as_str() {
            "classical" => Flavor::Classical,
            "cb" => Flavor::Cb,
            _ => return Err(bad()),
        };
        Ok(Self { map, flavor })
    }
}

impl Serialize for NormKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// How much a certificate value can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertStatus {
    /// SDP solved to tolerance; `value` is within `gap` of the true norm.
    Optimal,
    /// SDP stopped early; `value` and `gap` come from the best iterate.
    Inexact,
    /// Lower bound found by multistart search.
    Heuristic,
    /// Exact by exhaustive enumeration.
    Exhaustive,
}

/// Upper-bound side of a certificate: a feasible point of the minimisation
/// that defines the norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum PrimalWitness {
    /// `[[P, X], [X^*, Q]] >= 0`; `gamma2` bounds by `max diag`, `tx_cb` by
    /// `sqrt(Tr P)`.
    BlockGram { z: ComplexMatrix },
    /// `[[diag(p), X], [X^*, diag(q)]] >= 0`, bound `(sum p + sum q) / 2`.
    Scalings { p: Vec<f64>, q: Vec<f64> },
    /// `diag(v) >= X^* X` (or `X X^*` for `G`), bound `sqrt(sum v)`.
    Majorant { v: Vec<f64> },
}

/// Lower-bound side of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum DualWitness {
    /// `Y` in the polar unit ball with `Re <X, Y> ~ value`. `gram`, when
    /// present, is the PSD block matrix proving that `Y` is in the ball.
    Pairing {
        y: ComplexMatrix,
        #[serde(skip_serializing_if = "Option::is_none")]
        gram: Option<ComplexMatrix>,
    },
    /// Maximising vectors of a linear or bilinear form.
    Vectors {
        a: ComplexVector,
        #[serde(skip_serializing_if = "Option::is_none")]
        b: Option<ComplexVector>,
    },
    /// Maximising contraction `B` (and vector `a` for `T`).
    Contraction {
        #[serde(skip_serializing_if = "Option::is_none")]
        a: Option<ComplexVector>,
        b: ComplexMatrix,
    },
}

/// Solver and search diagnostics attached to a certificate.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CertMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_status: Option<SdpStatus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primal_infeasibility: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_infeasibility: Option<f64>,
    /// Best certified lower bound (pairing side for cb norms).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multistarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Value implied by an independent dual solve, when one was run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormCertificate {
    pub kind: NormKind,
    pub value: f64,
    /// Upper bound minus lower bound (zero for exhaustive results, not
    /// available for heuristic ones).
    pub gap: f64,
    pub status: CertStatus,
    /// True when `value` is the norm itself (to `gap`), not only a bound.
    pub exact: bool,
    pub primal_witness: Option<PrimalWitness>,
    pub dual_witness: Option<DualWitness>,
    pub meta: CertMeta,
}

impl NormCertificate {
    pub(crate) fn zero(kind: NormKind, m: usize, n: usize) -> Self {
        let dual_witness = match kind.flavor {
            Flavor::Cb => Some(DualWitness::Pairing {
                y: ComplexMatrix::zeros(m, n),
                gram: None,
            }),
            Flavor::Classical => None,
        };
        let primal_witness = match (kind.flavor, kind.map) {
            (Flavor::Cb, Interpretation::B) => Some(PrimalWitness::Scalings {
                p: vec![0.0; m],
                q: vec![0.0; n],
            }),
            (Flavor::Cb, Interpretation::F) => Some(PrimalWitness::Majorant { v: vec![0.0; n] }),
            (Flavor::Cb, Interpretation::G) => Some(PrimalWitness::Majorant { v: vec![0.0; m] }),
            (Flavor::Cb, _) => Some(PrimalWitness::BlockGram {
                z: ComplexMatrix::zeros(m + n, m + n),
            }),
            (Flavor::Classical, _) => None,
        };
        Self {
            kind,
            value: 0.0,
            gap: 0.0,
            status: if kind.flavor == Flavor::Cb {
                CertStatus::Optimal
            } else {
                CertStatus::Exhaustive
            },
            exact: true,
            primal_witness,
            dual_witness,
            meta: CertMeta::default(),
        }
    }

    /// The pairing matrix `Y` of a cb certificate.
    pub fn pairing_matrix(&self) -> Option<&ComplexMatrix> {
        match &self.dual_witness {
            Some(DualWitness::Pairing { y, .. }) => Some(y),
            _ => None,
        }
    }

    /// Upper bound implied by the primal witness alone.
    pub fn primal_bound(&self) -> Option<f64> {
        let w = self.primal_witness.as_ref()?;
        Some(match (w, self.kind.map) {
            (PrimalWitness::BlockGram { z }, Interpretation::T) => {
                let m = z.rows() - self.dual_dims()?.1;
                (0..m).map(|i| z[(i, i)].re).sum::<f64>().max(0.0).sqrt()
            }
            (PrimalWitness::BlockGram { z }, _) => {
                (0..z.rows()).map(|i| z[(i, i)].re).fold(0.0, f64::max)
            }
            (PrimalWitness::Scalings { p, q }, _) => 0.5 * (p.iter().sum::<f64>() + q.iter().sum::<f64>()),
            (PrimalWitness::Majorant { v }, _) => v.iter().sum::<f64>().max(0.0).sqrt(),
        })
    }

    fn dual_dims(&self) -> Option<(usize, usize)> {
        self.pairing_matrix().map(ComplexMatrix::shape)
    }
}

/// Search settings for the classical-norm oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicConfig {
    pub multistarts: usize,
    /// Phase-grid size for coordinate refinement.
    pub grid: usize,
    pub seed: u64,
    /// Restrict the vector arguments to `+-1` (real-scalar variant).
    pub real_signs: bool,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self {
            multistarts: 100,
            grid: 16,
            seed: 0,
            real_signs: false,
        }
    }
}

impl HeuristicConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn real_signs(mut self, on: bool) -> Self {
        self.real_signs = on;
        self
    }

    pub fn multistarts(mut self, k: usize) -> Self {
        self.multistarts = k;
        self
    }

    pub(crate) fn validate(&self) -> crate::Result<()> {
        if self.multistarts == 0 || self.grid < 2 {
            return Err(Error::Config("multistarts must be >= 1 and grid >= 2".into()));
        }
        Ok(())
    }
}

/// Settings for the cb-norm programs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbConfig {
    pub sdp: SdpSettings,
    /// Re-derive `tx_cb` through an independent `fx_cb` solve on its dual
    /// witness.
    pub cross_check: bool,
}

impl Default for CbConfig {
    fn default() -> Self {
        Self {
            sdp: SdpSettings::with_tol(DEFAULT_CB_TOL),
            cross_check: true,
        }
    }
}

impl CbConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            sdp: SdpSettings::with_tol(tol),
            ..Self::default()
        }
    }
}
