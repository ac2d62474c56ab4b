//! Infeasible primal-dual path following with the HKM search direction and
//! a Mehrotra predictor-corrector step.

use num_complex::Complex64;
use rayon::prelude::*;

use super::eig::{cholesky, jacobi_eig, lower_inverse};
use super::{BlockKind, BlockValue, Entry, SdpProblem, SdpSettings, SdpSolution, SdpStatus};
use crate::matrix::ComplexMatrix;

/// Dual objective (resp. negative primal objective) beyond which the scaled
/// problem is declared infeasible (resp. unbounded).
const DIVERGENCE: f64 = 1e8;
/// Iterations without improving the best residual before giving up.
const STALL_LIMIT: usize = 40;

type Blocks = Vec<BlockValue>;

fn zeros(kinds: &[BlockKind]) -> Blocks {
    kinds
        .iter()
        .map(|k| match *k {
            BlockKind::Hermitian(n) => BlockValue::Dense(ComplexMatrix::zeros(n, n)),
            BlockKind::Nonneg(n) => BlockValue::Diag(vec![0.0; n]),
        })
        .collect()
}

fn identity(kinds: &[BlockKind], t: f64) -> Blocks {
    kinds
        .iter()
        .map(|k| match *k {
            BlockKind::Hermitian(n) => BlockValue::Dense(ComplexMatrix::identity(n).scale(t)),
            BlockKind::Nonneg(n) => BlockValue::Diag(vec![t; n]),
        })
        .collect()
}

fn scatter(target: &mut Blocks, entries: &[Entry], t: f64) {
    for e in entries {
        match &mut target[e.block] {
            BlockValue::Dense(m) => m[(e.row, e.col)] += e.value * t,
            BlockValue::Diag(d) => d[e.row] += e.value.re * t,
        }
    }
}

fn inner(a: &Blocks, b: &Blocks) -> f64 {
    a.iter()
        .zip(b)
        .map(|pair| match pair {
            (BlockValue::Dense(x), BlockValue::Dense(y)) => x
                .as_slice()
                .iter()
                .zip(y.as_slice())
                .map(|(p, q)| (p * q.conj()).re)
                .sum::<f64>(),
            (BlockValue::Diag(x), BlockValue::Diag(y)) => x.iter().zip(y).map(|(p, q)| p * q).sum(),
            _ => unreachable!("block kinds always agree"),
        })
        .sum()
}

fn norm(a: &Blocks) -> f64 {
    inner(a, a).sqrt()
}

/// `a + t b`
fn axpy(a: &Blocks, t: f64, b: &Blocks) -> Blocks {
    a.iter()
        .zip(b)
        .map(|pair| match pair {
            (BlockValue::Dense(x), BlockValue::Dense(y)) => BlockValue::Dense(x + &y.scale(t)),
            (BlockValue::Diag(x), BlockValue::Diag(y)) => {
                BlockValue::Diag(x.iter().zip(y).map(|(p, q)| p + t * q).collect())
            }
            _ => unreachable!("block kinds always agree"),
        })
        .collect()
}

fn scale_blocks(a: &Blocks, t: f64) -> Blocks {
    a.iter()
        .map(|v| match v {
            BlockValue::Dense(x) => BlockValue::Dense(x.scale(t)),
            BlockValue::Diag(x) => BlockValue::Diag(x.iter().map(|p| p * t).collect()),
        })
        .collect()
}

/// Per-block data reused by every solve within one iteration.
enum Fact {
    Dense {
        x_chol_inv: ComplexMatrix,
        s_chol_inv: ComplexMatrix,
        s_inv: ComplexMatrix,
    },
    Diag,
}

/// Problem after appending the slack block and normalising the constraint
/// rows and the objective.
struct Data {
    kinds: Vec<BlockKind>,
    user_blocks: usize,
    c: Blocks,
    rows: Vec<Vec<Entry>>,
    b: Vec<f64>,
    row_scale: Vec<f64>,
    c_scale: f64,
    /// `[block][constraint]` entries of each constraint inside a block.
    block_rows: Vec<Vec<Vec<Entry>>>,
    /// `[block]` all `(constraint, entry)` pairs inside a block.
    block_flat: Vec<Vec<(usize, Entry)>>,
    /// `[block][position]` `(constraint, coefficient)` for diagonal blocks.
    diag_pos: Vec<Vec<Vec<(usize, f64)>>>,
    dim: usize,
}

impl Data {
    fn new(p: &SdpProblem) -> Self {
        let mut kinds = p.blocks.clone();
        let user_blocks = kinds.len();
        let ni = p.inequalities.len();
        if ni > 0 {
            kinds.push(BlockKind::Nonneg(ni));
        }
        let mut rows: Vec<Vec<Entry>> = Vec::new();
        let mut b = Vec::new();
        for (a, bk) in &p.equalities {
            rows.push(a.entries().to_vec());
            b.push(*bk);
        }
        for (i, (a, bk)) in p.inequalities.iter().enumerate() {
            let mut e = a.entries().to_vec();
            e.push(Entry {
                block: user_blocks,
                row: i,
                col: i,
                value: Complex64::new(1.0, 0.0),
            });
            rows.push(e);
            b.push(*bk);
        }
        let mut row_scale = Vec::with_capacity(rows.len());
        for (r, bk) in rows.iter_mut().zip(b.iter_mut()) {
            let nrm = r.iter().map(|e| e.value.norm_sqr()).sum::<f64>().sqrt();
            let s = if nrm > 0.0 { nrm } else { 1.0 };
            for e in r.iter_mut() {
                e.value /= s;
            }
            *bk /= s;
            row_scale.push(s);
        }

        let mut c = zeros(&kinds);
        scatter(&mut c, p.objective.entries(), 1.0);
        let cn = norm(&c);
        let c_scale = if cn > 0.0 { cn } else { 1.0 };
        let c = scale_blocks(&c, 1.0 / c_scale);

        let m = rows.len();
        let mut block_rows = vec![vec![Vec::new(); m]; kinds.len()];
        let mut block_flat = vec![Vec::new(); kinds.len()];
        let mut diag_pos: Vec<Vec<Vec<(usize, f64)>>> = kinds
            .iter()
            .map(|k| match *k {
                BlockKind::Nonneg(n) => vec![Vec::new(); n],
                BlockKind::Hermitian(_) => Vec::new(),
            })
            .collect();
        for (k, r) in rows.iter().enumerate() {
            for e in r {
                block_rows[e.block][k].push(*e);
                block_flat[e.block].push((k, *e));
                if let BlockKind::Nonneg(_) = kinds[e.block] {
                    diag_pos[e.block][e.row].push((k, e.value.re));
                }
            }
        }
        let dim = kinds.iter().map(BlockKind::size).sum();
        Self {
            kinds,
            user_blocks,
            c,
            rows,
            b,
            row_scale,
            c_scale,
            block_rows,
            block_flat,
            diag_pos,
            dim,
        }
    }

    fn a_op(&self, x: &Blocks) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|e| match &x[e.block] {
                        BlockValue::Dense(m) => (e.value * m[(e.col, e.row)]).re,
                        BlockValue::Diag(d) => e.value.re * d[e.row],
                    })
                    .sum()
            })
            .collect()
    }

    fn a_adj(&self, y: &[f64]) -> Blocks {
        let mut out = zeros(&self.kinds);
        for (r, &yk) in self.rows.iter().zip(y) {
            if yk != 0.0 {
                scatter(&mut out, r, yk);
            }
        }
        out
    }

    fn schur(&self, x: &Blocks, s: &Blocks, facts: &[Fact]) -> Vec<f64> {
        let m = self.rows.len();
        let mut mat = vec![0.0; m * m];
        mat.par_chunks_mut(m.max(1)).enumerate().for_each(|(k, row)| {
            for (bi, fact) in facts.iter().enumerate() {
                let mine = &self.block_rows[bi][k];
                if mine.is_empty() {
                    continue;
                }
                match (fact, &x[bi], &s[bi]) {
                    (Fact::Dense { s_inv, .. }, BlockValue::Dense(xm), _) => {
                        for f in mine {
                            for (l, e) in &self.block_flat[bi] {
                                row[*l] += (f.value * e.value * xm[(f.col, e.row)] * s_inv[(e.col, f.row)]).re;
                            }
                        }
                    }
                    (Fact::Diag, BlockValue::Diag(xd), BlockValue::Diag(sd)) => {
                        for f in mine {
                            let p = f.row;
                            let ratio = xd[p] / sd[p];
                            for &(l, w) in &self.diag_pos[bi][p] {
                                row[l] += f.value.re * w * ratio;
                            }
                        }
                    }
                    _ => unreachable!("block kinds always agree"),
                }
            }
        });
        for i in 0..m {
            for j in 0..i {
                let v = 0.5 * (mat[i * m + j] + mat[j * m + i]);
                mat[i * m + j] = v;
                mat[j * m + i] = v;
            }
        }
        mat
    }
}

/// Lower Cholesky factor of a symmetric positive definite real matrix, with
/// growing diagonal regularisation when the plain factorisation fails.
fn chol_real(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let max_diag = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max).max(1e-300);
    for shift in [0.0, 1e-14, 1e-12, 1e-10, 1e-8] {
        let mut l = vec![0.0; n * n];
        let mut ok = true;
        'outer: for j in 0..n {
            let mut d = a[j * n + j] + shift * max_diag;
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= 0.0 || !d.is_finite() {
                ok = false;
                break 'outer;
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        if ok {
            return Some(l);
        }
    }
    None
}

fn chol_solve(l: &[f64], n: usize, rhs: &[f64]) -> Vec<f64> {
    let mut z = rhs.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[k * n + i] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    z
}

/// Largest `alpha` with `V + alpha dV >= 0`, given the inverse Cholesky
/// factor of `V` (infinite when `dV` is PSD).
fn max_step_dense(chol_inv: &ComplexMatrix, d: &ComplexMatrix) -> f64 {
    let w = chol_inv.matmul(d).matmul(&chol_inv.adjoint()).hermitian_part();
    let lam = jacobi_eig(&w).min();
    if lam < 0.0 {
        -1.0 / lam
    } else {
        f64::INFINITY
    }
}

fn max_step_diag(v: &[f64], d: &[f64]) -> f64 {
    v.iter()
        .zip(d)
        .filter(|(_, &dv)| dv < 0.0)
        .map(|(&x, &dv)| -x / dv)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone)]
struct Iterate {
    x: Blocks,
    y: Vec<f64>,
    s: Blocks,
}

#[derive(Clone, Copy)]
struct Metrics {
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    relgap: f64,
}

impl Metrics {
    fn score(&self) -> f64 {
        self.pinf.max(self.dinf).max(self.relgap)
    }
}

struct Solver<'a> {
    data: &'a Data,
    bnorm: f64,
}

impl Solver<'_> {
    fn metrics(&self, it: &Iterate) -> (Metrics, Vec<f64>, Blocks) {
        let d = self.data;
        let ax = d.a_op(&it.x);
        let rp: Vec<f64> = d.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = d.a_adj(&it.y);
        let rd = axpy(&axpy(&d.c, -1.0, &aty), -1.0, &it.s);
        let pobj = inner(&d.c, &it.x);
        let dobj: f64 = d.b.iter().zip(&it.y).map(|(b, y)| b * y).sum();
        let pinf = rp.iter().map(|r| r * r).sum::<f64>().sqrt() / (1.0 + self.bnorm);
        let dinf = norm(&rd) / (1.0 + norm(&d.c));
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        (
            Metrics {
                pobj,
                dobj,
                pinf,
                dinf,
                relgap,
            },
            rp,
            rd,
        )
    }

    fn factor(&self, it: &Iterate) -> Option<Vec<Fact>> {
        it.x
            .iter()
            .zip(&it.s)
            .map(|pair| match pair {
                (BlockValue::Dense(x), BlockValue::Dense(s)) => {
                    let lx = cholesky(x)?;
                    let ls = cholesky(s)?;
                    let ls_inv = lower_inverse(&ls);
                    let s_inv = ls_inv.adjoint_matmul(&ls_inv).hermitian_part();
                    Some(Fact::Dense {
                        x_chol_inv: lower_inverse(&lx),
                        s_chol_inv: ls_inv,
                        s_inv,
                    })
                }
                (BlockValue::Diag(x), BlockValue::Diag(s)) => {
                    if x.iter().chain(s).all(|v| *v > 0.0 && v.is_finite()) {
                        Some(Fact::Diag)
                    } else {
                        None
                    }
                }
                _ => unreachable!("block kinds always agree"),
            })
            .collect()
    }

    /// HKM direction for target `sigma_mu` and second-order correction
    /// `corr` (the product `dX_aff dS_aff`).
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        it: &Iterate,
        facts: &[Fact],
        lm: &[f64],
        rp: &[f64],
        rd: &Blocks,
        sigma_mu: f64,
        corr: Option<&Blocks>,
    ) -> (Blocks, Vec<f64>, Blocks) {
        let d = self.data;
        // dX = sigma_mu S^-1 - X - (X dS + corr) S^-1 with dS = rd - A^*(dy)
        let build = |ds: &Blocks| -> Blocks {
            it.x
                .iter()
                .zip(&it.s)
                .zip(ds)
                .zip(facts)
                .enumerate()
                .map(|(bi, (((x, s), dsb), fact))| match (x, s, dsb, fact) {
                    (BlockValue::Dense(x), _, BlockValue::Dense(dsb), Fact::Dense { s_inv, .. }) => {
                        let mut t = x.matmul(dsb);
                        if let Some(BlockValue::Dense(c)) = corr.map(|c| &c[bi]) {
                            t = &t + c;
                        }
                        let g = &(&s_inv.scale(sigma_mu) - x) - &t.matmul(s_inv);
                        BlockValue::Dense(g.hermitian_part())
                    }
                    (BlockValue::Diag(x), BlockValue::Diag(s), BlockValue::Diag(dsb), Fact::Diag) => {
                        let cv = corr.and_then(|c| c[bi].as_diag());
                        BlockValue::Diag(
                            (0..x.len())
                                .map(|p| {
                                    let cp = cv.map_or(0.0, |c| c[p]);
                                    sigma_mu / s[p] - x[p] - (x[p] * dsb[p] + cp) / s[p]
                                })
                                .collect(),
                        )
                    }
                    _ => unreachable!("block kinds always agree"),
                })
                .collect()
        };
        let g = build(rd);
        let ag = d.a_op(&g);
        let rhs: Vec<f64> = rp.iter().zip(&ag).map(|(r, a)| r - a).collect();
        let dy = chol_solve(lm, rhs.len(), &rhs);
        let ds = axpy(rd, -1.0, &d.a_adj(&dy));
        let dx = build(&ds);
        (dx, dy, ds)
    }

    fn max_steps(&self, it: &Iterate, facts: &[Fact], dx: &Blocks, ds: &Blocks) -> (f64, f64) {
        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for bi in 0..facts.len() {
            match (&facts[bi], &it.x[bi], &it.s[bi], &dx[bi], &ds[bi]) {
                (
                    Fact::Dense {
                        x_chol_inv,
                        s_chol_inv,
                        ..
                    },
                    _,
                    _,
                    BlockValue::Dense(dxb),
                    BlockValue::Dense(dsb),
                ) => {
                    ap = ap.min(max_step_dense(x_chol_inv, dxb));
                    ad = ad.min(max_step_dense(s_chol_inv, dsb));
                }
                (Fact::Diag, BlockValue::Diag(x), BlockValue::Diag(s), BlockValue::Diag(dxb), BlockValue::Diag(dsb)) => {
                    ap = ap.min(max_step_diag(x, dxb));
                    ad = ad.min(max_step_diag(s, dsb));
                }
                _ => unreachable!("block kinds always agree"),
            }
        }
        (ap, ad)
    }
}

fn product(a: &Blocks, b: &Blocks) -> Blocks {
    a.iter()
        .zip(b)
        .map(|pair| match pair {
            (BlockValue::Dense(x), BlockValue::Dense(y)) => BlockValue::Dense(x.matmul(y)),
            (BlockValue::Diag(x), BlockValue::Diag(y)) => {
                BlockValue::Diag(x.iter().zip(y).map(|(p, q)| p * q).collect())
            }
            _ => unreachable!("block kinds always agree"),
        })
        .collect()
}

pub(super) fn run(p: &SdpProblem, settings: &SdpSettings) -> SdpSolution {
    let data = Data::new(p);
    let m = data.rows.len();
    let n = data.dim as f64;
    let bnorm = data.b.iter().map(|b| b * b).sum::<f64>().sqrt();
    let solver = Solver { data: &data, bnorm };

    let bmax = data.b.iter().map(|b| 1.0 + b.abs()).fold(1.0, f64::max);
    let xi = 10f64.max(n.sqrt()).max(n * bmax / 2.0);
    let eta = 10f64.max(n.sqrt()).max(1.0);
    let mut it = Iterate {
        x: identity(&data.kinds, xi),
        y: vec![0.0; m],
        s: identity(&data.kinds, eta),
    };

    let mut best: Option<(f64, Iterate, Metrics)> = None;
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;
    let mut since_best = 0;

    for iter in 0..settings.max_iter {
        iterations = iter;
        let (met, rp, rd) = solver.metrics(&it);
        let score = met.score();
        if !score.is_finite() {
            break;
        }
        if best.as_ref().is_none_or(|(b, _, _)| score < *b) {
            best = Some((score, it.clone(), met));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if score <= settings.tol {
            status = SdpStatus::Optimal;
            break;
        }
        if met.dobj > DIVERGENCE {
            status = SdpStatus::Infeasible;
            best = Some((score, it.clone(), met));
            break;
        }
        if -met.pobj > DIVERGENCE {
            let ax = data.a_op(&it.x);
            let ray = ax.iter().map(|v| v * v).sum::<f64>().sqrt() / -met.pobj;
            if ray < 1e-6 {
                status = SdpStatus::Unbounded;
                best = Some((score, it.clone(), met));
                break;
            }
        }
        if since_best > STALL_LIMIT {
            break;
        }

        let Some(facts) = solver.factor(&it) else {
            break;
        };
        let mu = inner(&it.x, &it.s) / n;
        let schur = data.schur(&it.x, &it.s, &facts);
        let lm = if m == 0 {
            Vec::new()
        } else {
            match chol_real(&schur, m) {
                Some(l) => l,
                None => break,
            }
        };

        // predictor
        let (dx, _dy, ds) = solver.direction(&it, &facts, &lm, &rp, &rd, 0.0, None);
        let (ap, ad) = solver.max_steps(&it, &facts, &dx, &ds);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = inner(&axpy(&it.x, ap, &dx), &axpy(&it.s, ad, &ds)) / n;
        let sigma = if mu > 0.0 {
            (mu_aff.max(0.0) / mu).powi(3).clamp(0.0, 1.0)
        } else {
            0.0
        };

        // corrector
        let corr = product(&dx, &ds);
        let (dx, dy, ds) = solver.direction(&it, &facts, &lm, &rp, &rd, sigma * mu, Some(&corr));
        let (ap, ad) = solver.max_steps(&it, &facts, &dx, &ds);
        let tau = 0.9 + 0.09 * ap.min(ad).min(1.0);
        let ap = (tau * ap).min(1.0);
        let ad = (tau * ad).min(1.0);
        if !(ap > 1e-14 && ad > 1e-14) {
            log::debug!("sdp: step lengths collapsed at iteration {iter}");
            break;
        }
        it.x = axpy(&it.x, ap, &dx);
        it.s = axpy(&it.s, ad, &ds);
        for (y, d) in it.y.iter_mut().zip(&dy) {
            *y += ad * d;
        }
        iterations = iter + 1;
    }

    if status == SdpStatus::MaxIterations {
        // a final check in case the last step reached the tolerance
        let (met, _, _) = solver.metrics(&it);
        if met.score().is_finite() && best.as_ref().is_none_or(|(b, _, _)| met.score() < *b) {
            best = Some((met.score(), it.clone(), met));
        }
        if best.as_ref().is_some_and(|(b, _, _)| *b <= settings.tol) {
            status = SdpStatus::Optimal;
        }
    }

    let (_, it, met) = best.unwrap_or_else(|| {
        let (met, _, _) = solver.metrics(&it);
        (f64::INFINITY, it, met)
    });
    let cs = data.c_scale;
    let multipliers: Vec<f64> = it
        .y
        .iter()
        .zip(&data.row_scale)
        .map(|(y, r)| y * cs / r)
        .collect();
    let primal: Blocks = it.x.into_iter().take(data.user_blocks).collect();
    let dual_slack: Blocks = scale_blocks(&it.s, cs)
        .into_iter()
        .take(data.user_blocks)
        .collect();
    log::debug!(
        "sdp: {status:?} after {iterations} iterations, pobj {:.6e}, relgap {:.2e}, pinf {:.2e}, dinf {:.2e}",
        met.pobj * cs,
        met.relgap,
        met.pinf,
        met.dinf
    );
    SdpSolution {
        primal,
        dual_slack,
        multipliers,
        primal_value: met.pobj * cs,
        dual_value: met.dobj * cs,
        gap: (met.pobj - met.dobj) * cs,
        primal_infeasibility: met.pinf,
        dual_infeasibility: met.dinf,
        iterations,
        status,
    }
}
