//! `cbnorm`: compute classical and completely bounded norms of complex
//! matrices, their optimal factorizations, and duality checks, as JSON.

mod canonical;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cbnorm::duality::{
    self, grothendieck_ratio, membership, pairing_identity_samples, polar_check_with, BallKind, LabConfig,
    PolarRelation, RatioConfig, RatioKind,
};
use cbnorm::factor;
use cbnorm::norms::{self, CertStatus, Flavor, Interpretation};
use cbnorm::{CbConfig, ComplexMatrix, Error, HeuristicConfig, NormCertificate, NormKind};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_HEURISTIC: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 4;

const IDENTITY_TOL: f64 = 1e-12;
const RATIO_FLOOR: f64 = 1.0 - 1e-6;

#[derive(Parser, Debug)]
#[command(name = "cbnorm", version, about = "Completely bounded norms of Schur multipliers and related maps")]
struct Cli {
    /// SDP tolerance, in (0, 1e-2].
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Starts for the classical searches.
    #[arg(long, global = true)]
    multistarts: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Restrict classical searches to real signs.
    #[arg(long, global = true)]
    real_signs: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Norm certificate of one interpretation, e.g. `--kind S-cb`.
    Norm {
        #[arg(long)]
        kind: String,
        /// Matrix JSON file (`-` for stdin).
        input: PathBuf,
    },
    /// Norm-optimal factorization (`--kind F|G|B|S|T`).
    Factor {
        #[arg(long, ignore_case = true)]
        kind: FactorArg,
        input: PathBuf,
    },
    /// Sampled duality checks.
    Duality {
        #[arg(long, ignore_case = true)]
        check: CheckArg,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Matrix shape `MxN`.
        #[arg(long, default_value = "3x3", value_parser = parse_dims)]
        dims: (usize, usize),
    },
    /// Search for large cb/classical ratios.
    Ratio {
        #[arg(long, ignore_case = true)]
        kind: RatioArg,
        #[arg(long, default_value = "2x2", value_parser = parse_dims)]
        dims: (usize, usize),
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Unit-ball membership (`--ball B|S|CB|CS|CF|CT`).
    Membership {
        #[arg(long)]
        ball: String,
        input: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FactorArg {
    F,
    G,
    B,
    S,
    T,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CheckArg {
    PairingIdentity,
    Polar,
    PolarB,
    PolarCb,
    PolarCf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RatioArg {
    Little,
    Big,
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (m, n) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected MxN, got '{s}'"))?;
    let m: usize = m.trim().parse().map_err(|_| format!("bad row count in '{s}'"))?;
    let n: usize = n.trim().parse().map_err(|_| format!("bad column count in '{s}'"))?;
    if m == 0 || n == 0 {
        return Err(format!("dimensions must be positive, got '{s}'"));
    }
    Ok((m, n))
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn input(error: anyhow::Error) -> Self {
        Self { code: EXIT_INPUT, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Solver { .. } => EXIT_SOLVER,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            error: anyhow!(e),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self::input(error)
    }
}

fn read_matrix(path: &PathBuf) -> anyhow::Result<ComplexMatrix> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).context("reading stdin")?;
    } else {
        text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    serde_json::from_str(&text).with_context(|| format!("parsing matrix JSON from {}", path.display()))
}

fn emit<T: Serialize>(cli: &Cli, report: &T) -> Result<(), Failure> {
    let text = canonical::to_string(report).context("serializing report")?;
    match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout")?,
    }
    Ok(())
}

fn cb_config(cli: &Cli) -> CbConfig {
    CbConfig::with_tol(cli.tol)
}

fn heuristic_config(cli: &Cli) -> HeuristicConfig {
    HeuristicConfig::with_seed(cli.seed)
        .multistarts(cli.multistarts.unwrap_or(100))
        .real_signs(cli.real_signs)
}

fn lab_config(cli: &Cli) -> LabConfig {
    LabConfig {
        cb: cb_config(cli),
        heuristic: heuristic_config(cli),
    }
}

fn certificate(kind: NormKind, x: &ComplexMatrix, cli: &Cli) -> cbnorm::Result<NormCertificate> {
    let cb = cb_config(cli);
    let h = heuristic_config(cli);
    match (kind.map, kind.flavor) {
        (Interpretation::F, Flavor::Cb) => norms::fx_cb(x, &cb),
        (Interpretation::G, Flavor::Cb) => norms::gx_cb(x, &cb),
        (Interpretation::B, Flavor::Cb) => norms::bx_cb(x, &cb),
        (Interpretation::S, Flavor::Cb) => norms::gamma2(x, &cb),
        (Interpretation::T, Flavor::Cb) => norms::tx_cb(x, &cb),
        (Interpretation::F, Flavor::Classical) => norms::fx_norm(x, &h),
        (Interpretation::G, Flavor::Classical) => norms::gx_norm(x, &h),
        (Interpretation::B, Flavor::Classical) => norms::bx_norm(x, &h),
        (Interpretation::S, Flavor::Classical) => norms::schur_norm_lb(x, &h),
        (Interpretation::T, Flavor::Classical) => norms::tx_norm(x, &h),
    }
}

fn status_code(status: CertStatus) -> u8 {
    match status {
        CertStatus::Optimal | CertStatus::Exhaustive => EXIT_OK,
        CertStatus::Heuristic => EXIT_HEURISTIC,
        CertStatus::Inexact => EXIT_SOLVER,
    }
}

#[derive(Serialize)]
struct FactorReport {
    factorization: factor::Factorization,
    /// `||X - reconstruction||_HS / ||X||_HS`.
    residual: f64,
    certificate: NormCertificate,
}

#[derive(Serialize)]
struct IdentityReport {
    check: &'static str,
    dims: (usize, usize),
    samples: usize,
    seed: u64,
    max_deviation: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct CheckedPolar {
    check: &'static str,
    passed: bool,
    #[serde(flatten)]
    report: duality::PolarReport,
}

#[derive(Serialize)]
struct CheckedRatio {
    passed: bool,
    #[serde(flatten)]
    report: duality::RatioReport,
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    if !(cli.tol > 0.0 && cli.tol <= 1e-2) {
        return Err(Failure::input(anyhow!("--tol must lie in (0, 1e-2], got {}", cli.tol)));
    }
    if cli.multistarts == Some(0) {
        return Err(Failure::input(anyhow!("--multistarts must be at least 1")));
    }
    match &cli.command {
        Command::Norm { kind, input } => {
            let kind: NormKind = kind.parse()?;
            let x = read_matrix(input)?;
            let cert = certificate(kind, &x, cli)?;
            emit(cli, &cert)?;
            Ok(status_code(cert.status))
        }
        Command::Factor { kind, input } => {
            let x = read_matrix(input)?;
            let cb = cb_config(cli);
            let (cert, f) = match kind {
                FactorArg::S => {
                    let c = norms::gamma2(&x, &cb)?;
                    let f = factor::schur_factor(&x, &c)?;
                    (c, f)
                }
                FactorArg::T => {
                    let c = norms::tx_cb(&x, &cb)?;
                    let f = factor::tx_factor(&x, &c)?;
                    (c, f)
                }
                FactorArg::F => {
                    let c = norms::fx_cb(&x, &cb)?;
                    let f = factor::fx_factor(&x, &c)?;
                    (c, f)
                }
                FactorArg::G => {
                    let c = norms::gx_cb(&x, &cb)?;
                    let f = factor::gx_factor(&x, &c)?;
                    (c, f)
                }
                FactorArg::B => {
                    let c = norms::bx_cb(&x, &cb)?;
                    let f = factor::bilinear_factor(&x, &c)?;
                    (c, f)
                }
            };
            let code = status_code(cert.status);
            let report = FactorReport {
                residual: f.residual(&x),
                factorization: f,
                certificate: cert,
            };
            emit(cli, &report)?;
            Ok(code)
        }
        Command::Duality { check, samples, dims } => {
            let (m, n) = *dims;
            match check {
                CheckArg::PairingIdentity => {
                    let dev = pairing_identity_samples(m, n, *samples, cli.seed)?;
                    let report = IdentityReport {
                        check: "pairing-identity",
                        dims: *dims,
                        samples: *samples,
                        seed: cli.seed,
                        max_deviation: dev,
                        tolerance: IDENTITY_TOL,
                        passed: dev <= IDENTITY_TOL,
                    };
                    emit(cli, &report)?;
                    Ok(if report.passed { EXIT_OK } else { EXIT_CHECK_FAILED })
                }
                polar => {
                    let (name, relations): (&'static str, &[PolarRelation]) = match polar {
                        CheckArg::PolarB => ("polar-b", &[PolarRelation::BilinearHull]),
                        CheckArg::PolarCb => ("polar-cb", &[PolarRelation::BilinearSchur]),
                        CheckArg::PolarCf => ("polar-cf", &[PolarRelation::LinearTrilinear]),
                        _ => ("polar", &PolarRelation::ALL),
                    };
                    let report = polar_check_with(m, n, *samples, cli.seed, relations, &lab_config(cli))?;
                    let passed = report.passed();
                    emit(
                        cli,
                        &CheckedPolar {
                            check: name,
                            passed,
                            report,
                        },
                    )?;
                    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
                }
            }
        }
        Command::Ratio { kind, dims, trials } => {
            let kind = match kind {
                RatioArg::Little => RatioKind::Little,
                RatioArg::Big => RatioKind::Big,
            };
            let mut cfg = RatioConfig::new(kind, dims.0, dims.1)
                .trials(*trials)
                .seed(cli.seed)
                .real_signs(cli.real_signs);
            if let Some(k) = cli.multistarts {
                cfg.final_multistarts = k;
            }
            let report = grothendieck_ratio(&cfg)?;
            let passed = report.best_ratio >= RATIO_FLOOR;
            emit(cli, &CheckedRatio { passed, report })?;
            Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Membership { ball, input } => {
            let ball: BallKind = ball.parse()?;
            let x = read_matrix(input)?;
            let report = membership(&x, ball, cli.tol, &lab_config(cli))?;
            emit(cli, &report)?;
            Ok(EXIT_OK)
        }
    }
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("CBNORM_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow!("CBNORM_THREADS must be a positive integer, got '{v}'"))?;
        if n == 0 {
            return Err(anyhow!("CBNORM_THREADS must be a positive integer, got '{v}'"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_INPUT);
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
