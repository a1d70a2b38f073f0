//! Batch front end: configuration, command dispatch and artifact output.

pub mod config;
pub mod output;
pub mod verify;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{BackusError, Result};
use crate::harmonic_ext::SphereExpansion;
use crate::linearized::{solve_linearized, solve_spectral, Path as SolvePath, PhiData};
use crate::nonlinear::fixed_point_solve;
use crate::norms::random_ball_point;
use crate::oracle::estimates::{probe_directions, DECAY_RADII};
use crate::oracle::{check_derivative_decay, check_gradient_to_holder, integral_lemma_at_sigma, DecayReport, HolderCheck};
use crate::poly::Term;

pub use config::{Command, GSpec, ModeName, RunConfig};
use output::{write_json, write_trace_csv, SolutionFile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_OTHER: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_DIVERGENCE: u8 = 4;
pub const EXIT_VERIFY: u8 = 5;

pub const DEFAULT_OUT: &str = "backus-out";
pub const THREADS_VAR: &str = "BACKUS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "backus", version, about = "Interior Backus problem solver on the unit ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Solve the nonlinear problem for the configured `g`.
    Solve(CommonArgs),
    /// Solve the linearized problem on both paths.
    Linearized(CommonArgs),
    /// Run the verification suite.
    Verify(CommonArgs),
    /// Run the estimate checkers.
    Estimates(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Spectral degree.
    #[arg(long = "L")]
    pub l_max: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl CliCommand {
    fn split(&self) -> (Command, &CommonArgs) {
        match self {
            CliCommand::Solve(a) => (Command::Solve, a),
            CliCommand::Linearized(a) => (Command::Linearized, a),
            CliCommand::Verify(a) => (Command::Verify, a),
            CliCommand::Estimates(a) => (Command::Estimates, a),
        }
    }
}

/// Reads the configuration file and applies flag overrides.
pub fn resolve_config(command: Command, args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.command = Some(command);
    if let Some(v) = &args.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = args.l_max {
        cfg.l_max = v;
    }
    if let Some(v) = args.mode {
        cfg.mode = v;
    }
    if let Some(v) = args.tol {
        cfg.tol = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn exit_code(e: &BackusError) -> u8 {
    match e {
        BackusError::Config(_) => EXIT_CONFIG,
        BackusError::Io(_) => EXIT_IO,
        BackusError::Divergence { .. } => EXIT_DIVERGENCE,
        _ => EXIT_OTHER,
    }
}

/// Caps the worker pool from `BACKUS_THREADS`, if set.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| BackusError::Config(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(BackusError::Config(format!("{THREADS_VAR} must be positive")));
    }
    // a pool built earlier in the process stays in place
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&dir)
        .map_err(|e| BackusError::Io(std::io::Error::other(format!("{}: {e}", dir.display()))))?;
    Ok(dir)
}

/// Parses arguments, runs the command and reports errors on stderr.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(command: &CliCommand) -> Result<u8> {
    init_threads()?;
    let (cmd, args) = command.split();
    let cfg = resolve_config(cmd, args)?;
    match cmd {
        Command::Solve => run_solve(&cfg),
        Command::Linearized => run_linearized(&cfg),
        Command::Verify => run_verify(&cfg),
        Command::Estimates => run_estimates(&cfg),
    }
}

/// Writes `solution.json`, `trace.csv` and `report.json`. On divergence
/// only the report is written and the divergence error is returned.
pub fn run_solve(cfg: &RunConfig) -> Result<u8> {
    cfg.validate()?;
    let g = cfg.boundary_data()?;
    let dir = out_dir(cfg)?;
    let h = if matches!(cfg.g, GSpec::Manufactured { .. }) { g.h } else { cfg.h };
    match fixed_point_solve(&g, cfg.mode.into(), h, &cfg.fixed_point_config()) {
        Ok(sol) => {
            write_json(&dir.join("solution.json"), &SolutionFile::new(&sol))?;
            write_trace_csv(&dir.join("trace.csv"), &sol, &g)?;
            write_json(&dir.join("report.json"), &sol.report)?;
            Ok(EXIT_OK)
        }
        Err(BackusError::Divergence { report }) => {
            write_json(&dir.join("report.json"), &report)?;
            Err(BackusError::Divergence { report })
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Serialize)]
struct ProbeValue {
    x: [f64; 3],
    spectral: f64,
    kernel: f64,
}

#[derive(Debug, Serialize)]
struct LinearizedFile {
    #[serde(rename = "L")]
    l_max: usize,
    v: Vec<Term>,
    harmonic_residual: f64,
    normal_derivative_residual: f64,
    equator_residual: f64,
    probes: Vec<ProbeValue>,
    max_path_difference: f64,
}

/// Spectral solve plus kernel-path values at seeded interior probes.
pub fn run_linearized(cfg: &RunConfig) -> Result<u8> {
    cfg.validate()?;
    let phi = SphereExpansion::from_list(cfg.l_max, &cfg.linearized.phi)?;
    let psi = cfg.linearized.psi_series();
    let spectral = solve_spectral(&phi, &psi)?;
    let kernel = solve_linearized(PhiData::Expansion(&phi), &psi, SolvePath::Kernel, &cfg.grid.kernel_options())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let probes = (0..cfg.linearized.probes)
        .map(|_| {
            let x = random_ball_point(&mut rng, 0.9);
            Ok(ProbeValue {
                x,
                spectral: spectral.evaluate(&x),
                kernel: kernel.evaluate(&x)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_path_difference = probes.iter().map(|p| (p.spectral - p.kernel).abs()).fold(0.0, f64::max);
    let file = LinearizedFile {
        l_max: cfg.l_max,
        v: spectral.v.to_terms(),
        harmonic_residual: spectral.residuals.harmonic,
        normal_derivative_residual: spectral.residuals.normal_derivative,
        equator_residual: spectral.residuals.equator,
        probes,
        max_path_difference,
    };
    let dir = out_dir(cfg)?;
    write_json(&dir.join("linearized.json"), &file)?;
    Ok(EXIT_OK)
}

/// Writes `verify.json` (always) and `verify_trace.csv`; exit 5 when any
/// case fails.
pub fn run_verify(cfg: &RunConfig) -> Result<u8> {
    cfg.validate()?;
    let dir = out_dir(cfg)?;
    let outcome = verify::run_suite(cfg);
    write_json(&dir.join("verify.json"), &outcome.summary)?;
    if let Some((sol, g)) = &outcome.trace {
        write_trace_csv(&dir.join("verify_trace.csv"), sol, g)?;
    }
    for c in &outcome.summary.cases {
        eprintln!(
            "{} {} value {:.3e} tolerance {:.3e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    Ok(if outcome.summary.passed { EXIT_OK } else { EXIT_VERIFY })
}

#[derive(Debug, Serialize)]
struct LemmaValue {
    kappa: f64,
    sigma: f64,
    r_prime: f64,
    value: f64,
    limit: f64,
}

#[derive(Debug, Serialize)]
struct EstimatesFile {
    integral_lemma: Vec<LemmaValue>,
    decay: Vec<DecayReport>,
    gradient_to_holder: HolderCheck,
}

/// Integral lemma table, derivative decay for orders 2 and 3, and the
/// gradient-to-Hölder quotient.
pub fn run_estimates(cfg: &RunConfig) -> Result<u8> {
    cfg.validate()?;
    let mut integral_lemma = Vec::new();
    for kappa in [0.5, 1.0, 2.0] {
        for sigma in [0.9, 0.99, 0.999] {
            for r_prime in [0.0, 0.3, 0.6] {
                integral_lemma.push(LemmaValue {
                    kappa,
                    sigma,
                    r_prime,
                    value: integral_lemma_at_sigma(kappa, sigma, r_prime)?,
                    limit: 0.5 / kappa,
                });
            }
        }
    }
    let phi = |y: &[f64; 3]| (0.5 * y[0] - 0.3 * y[2]).exp() + y[1] * y[2];
    let dirs = probe_directions();
    let decay = [2, 3]
        .iter()
        .map(|order| check_derivative_decay(phi, *order, cfg.alpha, &DECAY_RADII, &dirs))
        .collect::<Result<Vec<_>>>()?;
    let a = cfg.alpha;
    let gradient_to_holder = check_gradient_to_holder(
        |x: &[f64; 3]| (1.0 - x[0] * x[0] - x[1] * x[1] - x[2] * x[2]).max(0.0).powf(a),
        2.0 * a,
        a,
        cfg.pairs,
        cfg.seed,
    )?;
    let dir = out_dir(cfg)?;
    write_json(
        &dir.join("estimates.json"),
        &EstimatesFile {
            integral_lemma,
            decay,
            gradient_to_holder,
        },
    )?;
    Ok(EXIT_OK)
}
