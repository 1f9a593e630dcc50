//! The `symnmf` command line: configuration, file formats and the five
//! subcommands. Each `cmd_*` writes its artifacts into `cfg.out`:
//!
//! | command        | files                                                        |
//! |----------------|--------------------------------------------------------------|
//! | `solve`        | `factor.txt trace.csv timing.csv result.txt config.toml`     |
//! | `train`        | the above plus `checkpoint.symn`                             |
//! | `cluster`      | `labels.txt factor.txt trace.csv timing.csv result.txt ...`  |
//! | `check-bounds` | `bounds.txt config.toml`                                     |
//! | `synth`        | `matrix.txt` or `features.txt`, `labels.txt`, `config.toml`  |
//!
//! `timing.csv` holds wall-clock times; every other file is a deterministic
//! function of the configuration.

pub mod config;
pub mod io;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::classical::{
    default_pgd_step, half_step, random_init, run_classical, run_pgd, ClassicalConfig, SolverError,
    SolverTrace,
};
use crate::graph::{build_similarity, gaussian_blobs, synth_planted};
use crate::linalg::{fro_norm, spectral_norm_exact, DenseMatrix};
use crate::metrics::{relative_error, sparse_factor, ClusteringResult};
use crate::net::checkpoint::load_checkpoint_for;
use crate::net::{inversion_norms, net_forward, save_checkpoint, train, NetError, NetParams};
use crate::theory::{
    condition_number_inv, epsilon_ratio, proximality_constant, verify_proximality, BoundInputs,
    LambdaBound, TheoryError,
};

pub use config::{Command, Overrides, RunConfig, Solver, SynthKind};
pub use io::{load_labels, load_matrix, save_labels, save_matrix, FileError};

/// Largest `|X_ij − X_ji|` accepted as symmetric input.
pub const SYMMETRY_TOL: f64 = 1e-8;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_BOUND_VIOLATION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    File(#[from] FileError),
    #[error("numerical divergence: {0}")]
    Divergence(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::File(FileError::Io { .. }) => EXIT_OTHER,
            CliError::File(_) => EXIT_INPUT,
            CliError::Divergence(_) => EXIT_DIVERGENCE,
            CliError::Failed(_) => EXIT_OTHER,
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Divergence { .. } => CliError::Divergence(e.to_string()),
            SolverError::Config(_) | SolverError::Shape(_) => CliError::Input(e.to_string()),
            SolverError::Linalg(_) => CliError::Failed(e.to_string()),
        }
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        match e {
            NetError::Divergence { .. } => CliError::Divergence(e.to_string()),
            NetError::Config(_) | NetError::Shape(_) => CliError::Input(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<TheoryError> for CliError {
    fn from(e: TheoryError) -> Self {
        CliError::Failed(e.to_string())
    }
}

/// What a successful command reports back: the exit code (0, or the bound
/// violation code) and a human summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub summary: String,
}

impl Outcome {
    fn ok(summary: String) -> Self {
        Self {
            exit_code: EXIT_OK,
            summary,
        }
    }
}

fn fail(msg: impl Into<String>) -> CliError {
    CliError::Failed(msg.into())
}

fn prepare_out(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.out)
        .map_err(|e| fail(format!("cannot create {}: {e}", cfg.out.display())))?;
    config::write_snapshot(cfg, &cfg.out)
}

/// Loads `--input` and checks it is square and symmetric (within
/// [`SYMMETRY_TOL`]); the returned matrix is exactly symmetric.
pub fn load_symmetric(path: &Path) -> Result<DenseMatrix, CliError> {
    let x = load_matrix(path)?;
    let Some(asym) = x.max_asymmetry() else {
        return Err(CliError::Input(format!(
            "{}: matrix is {}x{}, need a square symmetric matrix",
            path.display(),
            x.rows(),
            x.cols()
        )));
    };
    if asym > SYMMETRY_TOL {
        return Err(CliError::Input(format!(
            "{}: matrix is not symmetric (max |X_ij - X_ji| = {asym:e})",
            path.display()
        )));
    }
    Ok(x.symmetrize().expect("square"))
}

fn input_path(cfg: &RunConfig) -> Result<&Path, CliError> {
    cfg.input
        .as_deref()
        .ok_or_else(|| CliError::Input(format!("{} needs --input", cfg.command.name())))
}

fn truth_labels(cfg: &RunConfig, n: usize) -> Result<Option<Vec<usize>>, CliError> {
    let Some(path) = &cfg.labels else {
        return Ok(None);
    };
    let labels = load_labels(path)?;
    if labels.len() != n {
        return Err(CliError::Input(format!(
            "{} has {} labels for {n} samples",
            path.display(),
            labels.len()
        )));
    }
    Ok(Some(labels))
}

fn resolve_rank(cfg: &RunConfig, truth: Option<&[usize]>) -> Result<usize, CliError> {
    if let Some(r) = cfg.rank {
        return Ok(r);
    }
    if let Some(t) = truth {
        let mut distinct = t.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        return Ok(distinct.len());
    }
    Err(CliError::Input(
        "--rank is required when no labels are given".into(),
    ))
}

/// `--init` if given (checked against `n × r`), else the seeded random start.
fn initial_factor(
    cfg: &RunConfig,
    x: &DenseMatrix,
    r: usize,
    seed: u64,
) -> Result<DenseMatrix, CliError> {
    let Some(path) = &cfg.init else {
        return Ok(random_init(x, r, seed));
    };
    let u0 = load_matrix(path)?;
    if u0.shape() != (x.rows(), r) {
        return Err(CliError::Input(format!(
            "{}: initial factor is {:?}, need ({}, {r})",
            path.display(),
            u0.shape(),
            x.rows()
        )));
    }
    if !u0.is_nonnegative() {
        return Err(CliError::Input(format!(
            "{}: initial factor has negative entries",
            path.display()
        )));
    }
    Ok(u0)
}

fn classical_config(cfg: &RunConfig, x: &DenseMatrix) -> ClassicalConfig {
    ClassicalConfig {
        max_iters: cfg.classical.max_iters,
        tol: cfg.classical.tol,
        seed: cfg.seed,
        ..ClassicalConfig::new(cfg.lambda.unwrap_or_else(|| fro_norm(x)))
    }
}

fn write_trace(dir: &Path, trace: &SolverTrace) -> Result<(), CliError> {
    io::save_text(&io::format_trace(trace), dir.join("trace.csv"))?;
    io::save_text(&io::format_timing(trace), dir.join("timing.csv"))?;
    Ok(())
}

/// A factorization from one of the three solvers.
#[derive(Debug, Clone)]
pub struct Fit {
    pub factor: DenseMatrix,
    pub trace: SolverTrace,
    /// Trained network when the solver was `net`.
    pub params: Option<NetParams>,
    /// Final value of the objective the solver minimizes (training loss for
    /// the network, relative error otherwise).
    pub objective: f64,
}

/// Runs the configured solver on `x` from `u0`.
pub fn fit(cfg: &RunConfig, x: &DenseMatrix, u0: &DenseMatrix) -> Result<Fit, CliError> {
    match cfg.solver {
        Solver::Scheme => {
            let (factor, trace) = run_classical(x, u0, &classical_config(cfg, x))?;
            let objective = trace.last_error().unwrap_or(f64::INFINITY);
            Ok(Fit {
                factor,
                trace,
                params: None,
                objective,
            })
        }
        Solver::Pgd => {
            let step = match cfg.classical.pgd_step {
                Some(s) => s,
                None => default_pgd_step(x)?,
            };
            let (factor, trace) = run_pgd(x, u0, step, &classical_config(cfg, x))?;
            let objective = trace.last_error().unwrap_or(f64::INFINITY);
            Ok(Fit {
                factor,
                trace,
                params: None,
                objective,
            })
        }
        Solver::Net => {
            let (params, trace) = train(x, u0, &cfg.train_config())?;
            let factor = net_forward(u0, &params)?.output().clone();
            let objective = trace
                .records
                .last()
                .and_then(|r| r.loss)
                .unwrap_or(f64::INFINITY);
            Ok(Fit {
                factor,
                trace,
                params: Some(params),
                objective,
            })
        }
    }
}

fn fit_summary(cfg: &RunConfig, x: &DenseMatrix, fit: &Fit) -> Result<String, CliError> {
    let mut s = String::new();
    let solver = match cfg.solver {
        Solver::Scheme => "scheme",
        Solver::Pgd => "pgd",
        Solver::Net => "net",
    };
    let lambda = fit.trace.records.last().map_or(f64::NAN, |r| r.lambda);
    let e = relative_error(x, &fit.factor).map_err(|e| CliError::Input(e.to_string()))?;
    let _ = writeln!(s, "solver: {solver}");
    let _ = writeln!(s, "rank: {}", fit.factor.cols());
    let _ = writeln!(s, "records: {}", fit.trace.len());
    let _ = writeln!(s, "lambda: {lambda:.17e}");
    let _ = writeln!(s, "relative_error: {e:.17e}");
    let _ = writeln!(s, "sparse_factor: {:.17e}", sparse_factor(&fit.factor));
    if let Some(p) = &fit.params {
        let _ = writeln!(s, "blocks: {}", p.depth());
        let _ = writeln!(s, "loss: {:.17e}", fit.objective);
    }
    Ok(s)
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    if cfg.solver == Solver::Net {
        return Err(CliError::Input(
            "solve runs the classical solvers (scheme or pgd); use train for the network".into(),
        ));
    }
    let x = load_symmetric(input_path(cfg)?)?;
    let truth = truth_labels(cfg, x.rows())?;
    let r = resolve_rank(cfg, truth.as_deref())?;
    let u0 = initial_factor(cfg, &x, r, cfg.seed)?;
    prepare_out(cfg)?;
    let fit = fit(cfg, &x, &u0)?;
    save_matrix(&fit.factor, cfg.out.join("factor.txt"))?;
    write_trace(&cfg.out, &fit.trace)?;
    let summary = fit_summary(cfg, &x, &fit)?;
    io::save_text(&summary, cfg.out.join("result.txt"))?;
    Ok(Outcome::ok(summary))
}

pub fn cmd_train(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let x = load_symmetric(input_path(cfg)?)?;
    let truth = truth_labels(cfg, x.rows())?;
    let r = resolve_rank(cfg, truth.as_deref())?;
    let u0 = initial_factor(cfg, &x, r, cfg.seed)?;
    prepare_out(cfg)?;
    let cfg = RunConfig {
        solver: Solver::Net,
        ..cfg.clone()
    };
    let fit = fit(&cfg, &x, &u0)?;
    let params = fit.params.as_ref().expect("network fit");
    save_checkpoint(params, cfg.out.join("checkpoint.symn")).map_err(|e| fail(e.to_string()))?;
    save_matrix(&fit.factor, cfg.out.join("factor.txt"))?;
    write_trace(&cfg.out, &fit.trace)?;
    let summary = fit_summary(&cfg, &x, &fit)?;
    io::save_text(&summary, cfg.out.join("result.txt"))?;
    Ok(Outcome::ok(summary))
}

/// Result of the clustering pipeline.
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub similarity: DenseMatrix,
    pub fit: Fit,
    pub result: ClusteringResult,
    /// Which restart was kept.
    pub chosen_restart: usize,
    pub sigma_floored: bool,
}

/// Seed of restart `j` in [`cluster_pipeline`].
pub fn restart_seed(seed: u64, j: usize) -> u64 {
    seed.wrapping_mul(1000).wrapping_add(j as u64)
}

/// Similarity graph, `cfg.restarts` factorizations from [`restart_seed`]s, keep the lowest final objective, then
/// label by row argmax and score against `truth` when given.
pub fn cluster_pipeline(
    cfg: &RunConfig,
    features: &DenseMatrix,
    truth: Option<&[usize]>,
) -> Result<ClusterOutcome, CliError> {
    if let Some(t) = truth {
        if t.len() != features.rows() {
            return Err(CliError::Input(format!(
                "{} labels for {} samples",
                t.len(),
                features.rows()
            )));
        }
    }
    let r = resolve_rank(cfg, truth)?;
    let sim = build_similarity(features, &cfg.graph).map_err(|e| CliError::Input(e.to_string()))?;
    let x = sim.matrix;
    let mut best: Option<(usize, Fit)> = None;
    for j in 0..cfg.restarts {
        let seed = restart_seed(cfg.seed, j);
        let u0 = initial_factor(cfg, &x, r, seed)?;
        let run = RunConfig {
            seed,
            ..cfg.clone()
        };
        let f = fit(&run, &x, &u0)?;
        if best.as_ref().is_none_or(|(_, b)| f.objective < b.objective) {
            best = Some((j, f));
        }
        if cfg.init.is_some() {
            break;
        }
    }
    let (chosen_restart, fit) = best.expect("restarts >= 1");
    let result = ClusteringResult::evaluate(&fit.factor, truth)
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(ClusterOutcome {
        similarity: x,
        fit,
        result,
        chosen_restart,
        sigma_floored: sim.sigma_floored,
    })
}

pub fn cmd_cluster(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let features = load_matrix(input_path(cfg)?)?;
    let truth = truth_labels(cfg, features.rows())?;
    if cfg.graph.k_neighbors >= features.rows() || cfg.graph.k_neighbors == 0 {
        return Err(CliError::Input(format!(
            "k_neighbors = {} needs to lie in 1..{}",
            cfg.graph.k_neighbors,
            features.rows()
        )));
    }
    prepare_out(cfg)?;
    let out = cluster_pipeline(cfg, &features, truth.as_deref())?;
    save_labels(&out.result.predicted, cfg.out.join("labels.txt"))?;
    save_matrix(&out.fit.factor, cfg.out.join("factor.txt"))?;
    write_trace(&cfg.out, &out.fit.trace)?;
    let mut summary = fit_summary(cfg, &out.similarity, &out.fit)?;
    let _ = writeln!(summary, "restart: {}", out.chosen_restart);
    let _ = writeln!(summary, "sigma_floored: {}", out.sigma_floored);
    summary.push_str(&out.result.to_report());
    io::save_text(&summary, cfg.out.join("result.txt"))?;
    Ok(Outcome::ok(summary))
}

/// Classical iterates `Ũ_1..Ũ_K` (single-factor map) from `u0`.
fn classical_path(
    x: &DenseMatrix,
    u0: &DenseMatrix,
    lambda: f64,
    k: usize,
) -> Result<Vec<DenseMatrix>, CliError> {
    let mut path = Vec::with_capacity(k);
    let mut u = u0.clone();
    for _ in 0..k {
        u = half_step(&u, x, lambda).map_err(|e| fail(e.to_string()))?;
        path.push(u.clone());
    }
    Ok(path)
}

/// Evaluates the λ lower bound and the proximality guarantee for a network
/// (from `--checkpoint`, or freshly initialized at `--lambda` / `‖X‖_F`).
/// The report goes to `bounds.txt`; the exit code is
/// [`EXIT_BOUND_VIOLATION`] when λ is not above the bound or a sampled block
/// output leaves its certified radius.
pub fn cmd_check_bounds(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let x = load_symmetric(input_path(cfg)?)?;
    let truth = truth_labels(cfg, x.rows())?;
    let n = x.rows();
    let mut params = match &cfg.checkpoint {
        Some(path) => {
            let p =
                crate::net::load_checkpoint(path).map_err(|e| CliError::Input(e.to_string()))?;
            let r = match resolve_rank(cfg, truth.as_deref()) {
                Ok(r) => r,
                Err(_) => p.dims().1,
            };
            load_checkpoint_for(path, n, r).map_err(|e| CliError::Input(e.to_string()))?
        }
        None => {
            let r = resolve_rank(cfg, truth.as_deref())?;
            let u0 = initial_factor(cfg, &x, r, cfg.seed)?;
            let lambda = cfg.lambda.unwrap_or_else(|| fro_norm(&x));
            crate::net::init_params(&x, &u0, lambda, cfg.net.num_blocks)?
        }
    };
    if let Some(l) = cfg.lambda {
        params.lambda = l;
    }
    let r = params.dims().1;
    let u0 = initial_factor(cfg, &x, r, cfg.seed)?;
    prepare_out(cfg)?;

    let lambda = params.lambda;
    let fwd = net_forward(&u0, &params)?;
    let reference = classical_path(&x, &u0, lambda, params.depth())?;
    let a = reference
        .iter()
        .map(fro_norm)
        .fold(fwd.max_factor_norm(), f64::max);
    let mut eps_measured = 0.0f64;
    for (cache, p) in fwd.caches.iter().zip(&params.blocks) {
        eps_measured = eps_measured.max(epsilon_ratio(p, &x, &cache.u_in, lambda)?);
    }
    let eps = eps_measured.max(cfg.net.proximity_eps);
    let bound = LambdaBound::compute(&x, &u0, a, eps)?;
    let satisfied = bound.satisfied_by(lambda);
    let b = spectral_norm_exact(&x).map_err(|e| fail(e.to_string()))?;

    let mut s = String::new();
    let _ = writeln!(s, "lambda: {lambda:.17e}");
    let _ = writeln!(s, "a: {a:.17e}");
    let _ = writeln!(s, "eps_measured: {eps_measured:.17e}");
    let _ = writeln!(s, "eps: {eps:.17e}");
    let _ = writeln!(s, "bound_proximality: {:.17e}", bound.proximality);
    let _ = writeln!(s, "bound_sufficiency: {:.17e}", bound.sufficiency);
    let _ = writeln!(s, "bound: {:.17e}", bound.value());
    let _ = writeln!(s, "lambda_satisfies_bound: {satisfied}");
    match proximality_constant(&BoundInputs { b, a, eps, lambda }) {
        Ok(c) => {
            let _ = writeln!(s, "proximality_constant: {c:.17e}");
        }
        Err(_) => {
            let _ = writeln!(s, "proximality_constant: undefined");
        }
    }
    let inv_norms = inversion_norms(&fwd)?;
    for (i, cache) in fwd.caches.iter().enumerate() {
        let (cond, cond_bound) = condition_number_inv(&cache.u_in, lambda)?;
        let _ = writeln!(
            s,
            "block_{}: cond {cond:.17e} cond_bound {cond_bound:.17e} inv_norm {:.17e}",
            i + 1,
            inv_norms[i]
        );
    }

    let mut violations = 0usize;
    let mut checked = true;
    for (i, (cache, p)) in fwd.caches.iter().zip(&params.blocks).enumerate() {
        match verify_proximality(
            &x,
            &cache.u_in,
            p,
            lambda,
            eps,
            cfg.bounds.samples,
            cfg.seed.wrapping_add(i as u64),
        ) {
            Ok(rep) => {
                violations += rep.violations;
                let _ = writeln!(
                    s,
                    "proximality_block_{}: samples {} violations {} max_ratio {:.17e} C {:.17e}",
                    i + 1,
                    rep.samples,
                    rep.violations,
                    rep.max_ratio,
                    rep.c
                );
            }
            Err(TheoryError::Domain(msg)) => {
                checked = false;
                let _ = writeln!(s, "proximality_block_{}: not_applicable ({msg})", i + 1);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let passed = satisfied && checked && violations == 0;
    let _ = writeln!(s, "proximality_violations: {violations}");
    let _ = writeln!(s, "status: {}", if passed { "pass" } else { "fail" });
    io::save_text(&s, cfg.out.join("bounds.txt"))?;
    Ok(Outcome {
        exit_code: if passed {
            EXIT_OK
        } else {
            EXIT_BOUND_VIOLATION
        },
        summary: s,
    })
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let n = cfg.synth.n;
    let r = cfg.rank.unwrap_or(3);
    if r == 0 || r > n {
        return Err(CliError::Input(format!(
            "need 1 <= rank <= n (rank {r}, n {n})"
        )));
    }
    if !(cfg.synth.noise >= 0.0) {
        return Err(CliError::Input("noise must be >= 0".into()));
    }
    prepare_out(cfg)?;
    let summary = match cfg.synth.kind {
        SynthKind::Planted => {
            let inst = synth_planted(n, r, cfg.synth.noise, cfg.seed);
            save_matrix(&inst.x, cfg.out.join("matrix.txt"))?;
            save_matrix(&inst.factor, cfg.out.join("factor.txt"))?;
            save_labels(&inst.labels, cfg.out.join("labels.txt"))?;
            format!(
                "kind: planted\nn: {n}\nrank: {r}\nnoise: {:e}\nfrobenius_norm: {:.17e}\n",
                cfg.synth.noise,
                fro_norm(&inst.x)
            )
        }
        SynthKind::Blobs => {
            let (features, labels) =
                gaussian_blobs(n, r, cfg.synth.radius, cfg.synth.spread, cfg.seed);
            save_matrix(&features, cfg.out.join("features.txt"))?;
            save_labels(&labels, cfg.out.join("labels.txt"))?;
            format!("kind: blobs\nn: {n}\nclusters: {r}\n")
        }
    };
    io::save_text(&summary, cfg.out.join("result.txt"))?;
    Ok(Outcome::ok(summary))
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Solve => cmd_solve(cfg),
        Command::Train => cmd_train(cfg),
        Command::Cluster => cmd_cluster(cfg),
        Command::CheckBounds => cmd_check_bounds(cfg),
        Command::Synth => cmd_synth(cfg),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "symnmf",
    version,
    about = "Symmetric NMF solvers, unrolled network and bound checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Factorize a symmetric matrix with the alternating scheme or PGD.
    Solve(Overrides),
    /// Train the unrolled network and save a checkpoint.
    Train(Overrides),
    /// Similarity graph, factorization and argmax labels for a feature matrix.
    Cluster(Overrides),
    /// Evaluate the λ lower bound and proximality of a network.
    CheckBounds(Overrides),
    /// Write a synthetic planted matrix or blob features.
    Synth(Overrides),
}

impl Sub {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let (command, o) = match self {
            Sub::Solve(o) => (Command::Solve, o),
            Sub::Train(o) => (Command::Train, o),
            Sub::Cluster(o) => (Command::Cluster, o),
            Sub::CheckBounds(o) => (Command::CheckBounds, o),
            Sub::Synth(o) => (Command::Synth, o),
        };
        RunConfig::resolve(command, o)
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match cli.command.resolve().and_then(|cfg| run(&cfg)) {
        Ok(out) => {
            print!("{}", out.summary);
            out.exit_code
        }
        Err(e) => {
            eprintln!("symnmf: {e}");
            e.exit_code()
        }
    }
}
