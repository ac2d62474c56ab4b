//! Search for large ratios `bx_cb / bx_norm` (big constant) or
//! `fx_cb / fx_norm` (little constant) at fixed dimensions.
//!
//! Every ratio found is a certified lower bound for the corresponding
//! constant at those dimensions only up to the accuracy of the classical
//! search: the denominator is a lower bound, so the ratio can only be
//! overstated when the search misses the true classical norm. The final
//! denominator is therefore recomputed with many more starts.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{hs_norm, ComplexMatrix};
use crate::norms::{bx_cb, bx_norm, fx_cb, fx_norm, CbConfig, HeuristicConfig, NormCertificate};
use crate::rng;

/// Largest dimension accepted by the search.
pub const MAX_RATIO_DIM: usize = 8;
/// Best starts that get the small-step polish.
const POLISHED: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioKind {
    /// `fx_cb / fx_norm`.
    Little,
    /// `bx_cb / bx_norm`.
    Big,
}

impl std::str::FromStr for RatioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "little" => Ok(RatioKind::Little),
            "big" => Ok(RatioKind::Big),
            _ => Err(Error::Config(format!("unknown ratio kind '{s}' (expected little or big)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioConfig {
    pub kind: RatioKind,
    pub m: usize,
    pub n: usize,
    /// Independent random starts.
    pub trials: usize,
    pub seed: u64,
    /// Restrict the classical search (and the sampled matrices) to real
    /// signs and real entries.
    pub real_signs: bool,
    /// Perturbation steps per start.
    pub steps: usize,
    /// Extra small-step perturbations applied to the best few starts.
    pub polish_steps: usize,
    /// Classical-search starts during the ascent.
    pub search_multistarts: usize,
    /// Classical-search starts for the reported denominator.
    pub final_multistarts: usize,
}

impl RatioConfig {
    pub fn new(kind: RatioKind, m: usize, n: usize) -> Self {
        Self {
            kind,
            m,
            n,
            trials: 20,
            seed: 0,
            real_signs: false,
            steps: 60,
            polish_steps: 200,
            search_multistarts: 16,
            final_multistarts: 400,
        }
    }

    pub fn trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn real_signs(mut self, on: bool) -> Self {
        self.real_signs = on;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.m > MAX_RATIO_DIM || self.n > MAX_RATIO_DIM {
            return Err(Error::Dimension(format!(
                "ratio search needs 1 <= m, n <= {MAX_RATIO_DIM}, got {}x{}",
                self.m, self.n
            )));
        }
        if self.trials == 0 || self.search_multistarts == 0 || self.final_multistarts == 0 {
            return Err(Error::Config("trials and multistarts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub kind: RatioKind,
    pub dims: (usize, usize),
    pub best_ratio: f64,
    pub argmax: ComplexMatrix,
    pub numerator: NormCertificate,
    pub denominator: NormCertificate,
    pub trials: usize,
    pub seed: u64,
    pub real_signs: bool,
}

struct Evaluator {
    kind: RatioKind,
    cb: CbConfig,
    heuristic: HeuristicConfig,
}

impl Evaluator {
    fn numerator(&self, x: &ComplexMatrix) -> Result<NormCertificate> {
        match self.kind {
            RatioKind::Big => bx_cb(x, &self.cb),
            RatioKind::Little => fx_cb(x, &self.cb),
        }
    }

    fn denominator(&self, x: &ComplexMatrix) -> Result<NormCertificate> {
        match self.kind {
            RatioKind::Big => bx_norm(x, &self.heuristic),
            RatioKind::Little => fx_norm(x, &self.heuristic),
        }
    }

    /// Ratio at `x`, or `None` if either side failed or vanished.
    fn ratio(&self, x: &ComplexMatrix) -> Option<f64> {
        let num = self.numerator(x).ok()?;
        let den = self.denominator(x).ok()?;
        (den.value > 0.0).then(|| num.value / den.value)
    }
}

fn perturb<R: Rng + ?Sized>(g: &mut R, x: &ComplexMatrix, step: f64, real: bool) -> ComplexMatrix {
    let (m, n) = x.shape();
    let noise = rng::gaussian_matrix(g, m, n, real).scale(step / ((m * n) as f64).sqrt());
    let mut y = x.clone();
    for (a, b) in y.as_mut_slice().iter_mut().zip(noise.as_slice()) {
        *a += b;
    }
    let s = hs_norm(&y);
    if s > 0.0 {
        y.scale(1.0 / s)
    } else {
        x.clone()
    }
}

/// Accept-if-better Gaussian perturbation ascent. The step grows after a
/// success and shrinks after a failure (about one success in five keeps it
/// level), so it follows ridges where several classical maximisers tie.
fn ascend<R: Rng + ?Sized>(
    eval: &Evaluator,
    g: &mut R,
    mut x: ComplexMatrix,
    mut best: f64,
    steps: usize,
    mut step: f64,
    real: bool,
) -> (f64, ComplexMatrix) {
    for _ in 0..steps {
        let y = perturb(g, &x, step, real);
        match eval.ratio(&y) {
            Some(r) if r > best => {
                best = r;
                x = y;
                step = (step * 1.5).min(1.0);
            }
            _ => step = (step * 0.9).max(1e-12),
        }
    }
    (best, x)
}

/// One random start followed by a coarse ascent.
fn trial(eval: &Evaluator, cfg: &RatioConfig, index: usize) -> Option<(f64, ComplexMatrix)> {
    let mut g = rng::stream(cfg.seed, index as u64);
    let x0 = rng::gaussian_matrix(&mut g, cfg.m, cfg.n, cfg.real_signs);
    let x = x0.scale(1.0 / hs_norm(&x0).max(f64::MIN_POSITIVE));
    let r0 = eval.ratio(&x)?;
    Some(ascend(eval, &mut g, x, r0, cfg.steps, 0.3, cfg.real_signs))
}

/// Searches for the largest cb/classical ratio at dimensions `m x n`.
pub fn grothendieck_ratio(cfg: &RatioConfig) -> Result<RatioReport> {
    cfg.validate()?;
    let search = Evaluator {
        kind: cfg.kind,
        cb: CbConfig {
            cross_check: false,
            ..CbConfig::with_tol(1e-8)
        },
        heuristic: HeuristicConfig::with_seed(cfg.seed)
            .multistarts(cfg.search_multistarts)
            .real_signs(cfg.real_signs),
    };
    let mut found: Vec<(usize, f64, ComplexMatrix)> = (0..cfg.trials)
        .into_par_iter()
        .filter_map(|t| trial(&search, cfg, t).map(|(r, x)| (t, r, x)))
        .collect();
    if found.is_empty() {
        return Err(Error::Config("no trial produced a finite ratio".into()));
    }
    // best first, ties to the lowest index
    found.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    found.truncate(POLISHED);
    let polished: Vec<(usize, f64, ComplexMatrix)> = found
        .into_par_iter()
        .enumerate()
        .map(|(k, (t, r, x))| {
            let mut g = rng::stream(cfg.seed, (cfg.trials + k) as u64);
            let (r, x) = ascend(&search, &mut g, x, r, cfg.polish_steps, 1e-2, cfg.real_signs);
            (t, r, x)
        })
        .collect();
    let (_, _, argmax) = polished
        .into_iter()
        .reduce(|a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
        .expect("at least one polished start");

    let fin = Evaluator {
        kind: cfg.kind,
        cb: CbConfig::default(),
        heuristic: HeuristicConfig::with_seed(cfg.seed)
            .multistarts(cfg.final_multistarts)
            .real_signs(cfg.real_signs),
    };
    let numerator = fin.numerator(&argmax)?;
    let denominator = fin.denominator(&argmax)?;
    let best_ratio = numerator.value / denominator.value;
    if best_ratio < 1.0 - 1e-6 {
        log::warn!("ratio {best_ratio} below 1: the cb value undercuts the classical one");
    }
    Ok(RatioReport {
        kind: cfg.kind,
        dims: (cfg.m, cfg.n),
        best_ratio,
        argmax,
        numerator,
        denominator,
        trials: cfg.trials,
        seed: cfg.seed,
        real_signs: cfg.real_signs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_is_at_least_one() {
        for kind in [RatioKind::Big, RatioKind::Little] {
            let r = grothendieck_ratio(&RatioConfig::new(kind, 2, 3).trials(3).seed(4)).unwrap();
            assert!(r.best_ratio >= 1.0 - 1e-6, "{kind:?}: {}", r.best_ratio);
        }
    }

    #[test]
    fn rejects_large_dims() {
        assert!(grothendieck_ratio(&RatioConfig::new(RatioKind::Big, 9, 2)).is_err());
    }

    #[test]
    fn hadamard_ratio_under_real_signs() {
        let ev = Evaluator {
            kind: RatioKind::Big,
            cb: CbConfig::default(),
            heuristic: HeuristicConfig::default().real_signs(true),
        };
        let h2 = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, -1.0]).unwrap();
        assert!((ev.ratio(&h2).unwrap() - 2f64.sqrt()).abs() < 1e-6);
        let complex = Evaluator {
            heuristic: HeuristicConfig::default(),
            ..ev
        };
        assert!((complex.ratio(&h2).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rank_one_has_ratio_one() {
        let u = ComplexMatrix::from_real(3, 1, &[1.0, -2.0, 0.5]).unwrap();
        let v = ComplexMatrix::from_real(1, 2, &[0.3, 1.0]).unwrap();
        let x = u.matmul(&v);
        for kind in [RatioKind::Big, RatioKind::Little] {
            let ev = Evaluator {
                kind,
                cb: CbConfig::default(),
                heuristic: HeuristicConfig::default(),
            };
            assert!((ev.ratio(&x).unwrap() - 1.0).abs() < 1e-6, "{kind:?}");
        }
    }
}
