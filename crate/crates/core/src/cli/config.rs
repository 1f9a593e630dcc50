use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::graph::SimilarityConfig;
use crate::net::TrainConfig;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Train,
    Cluster,
    CheckBounds,
    Synth,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Train => "train",
            Command::Cluster => "cluster",
            Command::CheckBounds => "check-bounds",
            Command::Synth => "synth",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Scheme,
    Pgd,
    Net,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    /// Symmetric matrix from planted cluster indicators plus noise.
    Planted,
    /// 2-D Gaussian blobs (a feature matrix for `cluster`).
    Blobs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassicalSection {
    pub max_iters: usize,
    pub tol: f64,
    /// Fixed PGD step; `1/(2‖X‖₂)` when absent.
    pub pgd_step: Option<f64>,
}

impl Default for ClassicalSection {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-10,
            pgd_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSection {
    pub kind: SynthKind,
    pub n: usize,
    pub noise: f64,
    /// Distance of blob centers from the origin.
    pub radius: f64,
    /// Standard deviation of each blob.
    pub spread: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            kind: SynthKind::Planted,
            n: 90,
            noise: 0.05,
            radius: 10.0,
            spread: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundsSection {
    /// Samples drawn per block by the proximality check.
    pub samples: usize,
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self { samples: 200 }
    }
}

/// Everything one command needs. Serialized back out as `config.toml` in the
/// run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// Initial factor; random when absent.
    pub init: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub out: PathBuf,
    pub solver: Solver,
    /// Factorization rank; taken from the label count when absent.
    pub rank: Option<usize>,
    pub seed: u64,
    /// Fixed λ for every solver. For the network this also disables
    /// learning and projecting λ.
    pub lambda: Option<f64>,
    /// Independent random starts in `cluster`; the one with the lowest final
    /// objective is kept.
    pub restarts: usize,
    pub classical: ClassicalSection,
    pub net: TrainConfig,
    pub graph: SimilarityConfig,
    pub synth: SynthSection,
    pub bounds: BoundsSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Solve,
            input: None,
            labels: None,
            init: None,
            checkpoint: None,
            out: PathBuf::from("run"),
            solver: Solver::Scheme,
            rank: None,
            seed: 0,
            lambda: None,
            restarts: 3,
            classical: ClassicalSection::default(),
            net: TrainConfig::default(),
            graph: SimilarityConfig::default(),
            synth: SynthSection::default(),
            bounds: BoundsSection::default(),
        }
    }
}

/// Flag values; `None` leaves the configured value alone.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Initial factor matrix (n x rank).
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub solver: Option<Solver>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fix λ (the network then neither learns nor projects it).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma_l1: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub no_lambda_projection: bool,
    #[arg(long)]
    pub k_neighbors: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<SynthKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    /// Reads `o.config` (or starts from defaults), then applies the flags.
    pub fn resolve(command: Command, o: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match &o.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        cfg.command = command;
        cfg.apply(o);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        fn set<T: Clone>(dst: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *dst = v.clone();
            }
        }
        fn set_opt<T: Clone>(dst: &mut Option<T>, v: &Option<T>) {
            if v.is_some() {
                dst.clone_from(v);
            }
        }
        set_opt(&mut self.input, &o.input);
        set_opt(&mut self.labels, &o.labels);
        set_opt(&mut self.init, &o.init);
        set_opt(&mut self.checkpoint, &o.checkpoint);
        set(&mut self.out, &o.out);
        set(&mut self.solver, &o.solver);
        set_opt(&mut self.rank, &o.rank);
        set(&mut self.seed, &o.seed);
        set_opt(&mut self.lambda, &o.lambda);
        set(&mut self.restarts, &o.restarts);
        set(&mut self.classical.max_iters, &o.max_iters);
        set(&mut self.classical.tol, &o.tol);
        set(&mut self.net.num_blocks, &o.blocks);
        set(&mut self.net.lr, &o.lr);
        set(&mut self.net.beta, &o.beta);
        set(&mut self.net.gamma_l1, &o.gamma_l1);
        set(&mut self.net.epochs, &o.epochs);
        if o.no_lambda_projection {
            self.net.lambda_projection = false;
        }
        set(&mut self.graph.k_neighbors, &o.k_neighbors);
        set(&mut self.bounds.samples, &o.samples);
        set(&mut self.synth.kind, &o.kind);
        set(&mut self.synth.n, &o.n);
        set(&mut self.synth.noise, &o.noise);
    }

    /// The training configuration after the λ override and seed are folded
    /// in.
    pub fn train_config(&self) -> TrainConfig {
        let mut net = self.net.clone();
        net.seed = self.seed;
        if let Some(l) = self.lambda {
            net.lambda_init = Some(l);
            net.learn_lambda = false;
        }
        net
    }

    /// Checks that every referenced input exists and the basic values make
    /// sense, before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let needs_input = self.command != Command::Synth;
        if needs_input && self.input.is_none() {
            return Err(CliError::Input(format!(
                "{} needs --input",
                self.command.name()
            )));
        }
        for path in [&self.input, &self.labels, &self.init, &self.checkpoint]
            .into_iter()
            .flatten()
        {
            if !path.is_file() {
                return Err(CliError::Input(format!("no such file: {}", path.display())));
            }
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0) || !l.is_finite() {
                return Err(CliError::Input(format!("--lambda must be > 0, got {l}")));
            }
        }
        if self.rank == Some(0) {
            return Err(CliError::Input("--rank must be >= 1".into()));
        }
        if self.restarts == 0 {
            return Err(CliError::Input("restarts must be >= 1".into()));
        }
        self.train_config()
            .validate()
            .map_err(|e| CliError::Input(e.to_string()))?;
        Ok(())
    }
}

pub fn write_snapshot(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    super::io::save_text(&cfg.to_toml(), dir.join("config.toml"))?;
    Ok(())
}
