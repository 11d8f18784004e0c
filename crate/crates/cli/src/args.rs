use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qnet",
    version,
    about = "SIS epidemics on classical and photonic quantum networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a network and write it in the graph file format.
    Generate(GenerateArgs),
    /// Compute epidemic thresholds of a graph or a Waxman ensemble.
    Threshold(ThresholdArgs),
    /// Simulate infection dynamics and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Run the experiment pipeline described by a config file.
    Experiment(ExperimentArgs),
    /// Check config files without running them.
    ValidateConfig(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Er,
    Waxman,
    QuantumWaxman,
    /// Path graph with unit spacing; handy for small exact checks.
    Path,
}

/// Generator parameters shared by every command that builds a graph.
#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// Number of nodes.
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge probability of the Erdős–Rényi model.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Disk radius in km.
    #[arg(long, default_value_t = 1600.0)]
    pub r_max: f64,
    /// Waxman characteristic length in km.
    #[arg(long, default_value_t = 226.0)]
    pub alpha_l: f64,
    /// Waxman link probability at zero distance.
    #[arg(long, default_value_t = 1.0)]
    pub beta_l: f64,
    /// Fiber attenuation in dB/km.
    #[arg(long, default_value_t = 0.2)]
    pub gamma: f64,
    /// Photons per link attempt.
    #[arg(long, default_value_t = 1000)]
    pub n_photons: u64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub gen: GeneratorArgs,
    /// Output graph file; defaults to graph.txt in the output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, env = "QNET_OUTPUT_DIR", default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Kw,
    Mfa,
    /// Spectral threshold of a binary matrix.
    Am,
    /// Spectral threshold of a probability-weighted matrix.
    Pam,
    All,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Graph file to read instead of generating one.
    #[arg(long, conflicts_with = "model")]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub gen: GeneratorArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub estimator: EstimatorArg,
    /// Number of Waxman topologies; switches to an ensemble average.
    #[arg(long, conflicts_with = "graph")]
    pub ensemble: Option<usize>,
    /// Disorder treatment for ensembles: 1 annealed, 2 quenched, 3 fully sampled.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub method: u8,
    /// Link realizations per topology (method 3).
    #[arg(long, default_value_t = 20)]
    pub inner: usize,
    /// Per-instance CSV for ensembles; defaults to ensemble.csv in the output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, env = "QNET_OUTPUT_DIR", default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimMethod {
    Mnlds,
    Direct,
    Kw,
    Exact,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, conflicts_with = "model")]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub gen: GeneratorArgs,
    #[arg(long, value_enum, default_value = "mnlds")]
    pub method: SimMethod,
    /// Infection probability per contact per step.
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    /// Curing probability per step.
    #[arg(long, group = "curing")]
    pub delta: Option<f64>,
    /// Curing probability in units of the critical rate beta * lambda_1.
    #[arg(long, group = "curing")]
    pub delta_ratio: Option<f64>,
    /// Initial infection probability of every node.
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
    #[arg(long, default_value_t = 1000)]
    pub t_max: usize,
    /// Convergence tolerance of the mNLDS recursion.
    #[arg(long, default_value_t = 1e-8)]
    pub conv_tol: f64,
    /// Monte Carlo runs for the direct simulation.
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    /// Seed of the Monte Carlo runs.
    #[arg(long, default_value_t = 0)]
    pub sim_seed: u64,
    /// Trajectory CSV; defaults to trajectory.csv in the output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, env = "QNET_OUTPUT_DIR", default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Config file (TOML). A missing `.toml` extension is added.
    pub config: PathBuf,
    /// Caps the worker pool, overriding the config.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Used when the config has no `output_dir`; results go to a subdirectory
    /// named after the experiment.
    #[arg(long, env = "QNET_OUTPUT_DIR", default_value = "qnet-out")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(required = true)]
    pub configs: Vec<PathBuf>,
}
