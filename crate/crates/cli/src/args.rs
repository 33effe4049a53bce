use std::path::PathBuf;

use causalfire_core::discovery::{DiscoveryConfig, Scaling};
use causalfire_core::inference::DagConfigKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "causalfire",
    version,
    about = "Causal discovery and effect estimation for fire-resistance test data"
)]
pub struct Cli {
    #[command(flatten)]
    pub run: RunConfig,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Input CSV file.
    #[arg(long, global = true, value_name = "FILE")]
    pub data: Option<PathBuf>,

    /// `fire8` for the built-in eight-column schema, or a JSON schema file.
    #[arg(
        long,
        global = true,
        default_value = "fire8",
        value_name = "fire8|FILE"
    )]
    pub schema: String,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Output directory.
    #[arg(
        long,
        global = true,
        env = "CAUSALFIRE_OUT",
        default_value = ".",
        value_name = "DIR"
    )]
    pub out: PathBuf,

    /// Report formats to write, comma separated.
    #[arg(
        long,
        global = true,
        value_enum,
        value_delimiter = ',',
        default_value = "markdown,json"
    )]
    pub format: Vec<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Markdown,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-column statistics and correlation matrix.
    Summarize,
    /// Learn a DAG from the data; writes dag.dot and dag.json.
    Discover(DiscoverArgs),
    /// Effect of every input on the outcome under one DAG configuration.
    Study(StudyArgs),
    /// Predictive models versus causal estimates under fix-to-mean interventions.
    Compare(CompareArgs),
    /// Write a synthetic fire dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct LearnArgs {
    /// L1 penalty on edge weights.
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,

    /// Edges with |weight| below this are pruned.
    #[arg(long, default_value_t = 0.3)]
    pub threshold: f64,

    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,

    /// Column rescaling before learning: raw, standardize or common.
    #[arg(long, default_value = "standardize")]
    pub scaling: Scaling,
}

impl LearnArgs {
    pub fn config(&self) -> DiscoveryConfig {
        DiscoveryConfig {
            l1_penalty: self.lambda,
            edge_threshold: self.threshold,
            max_outer_iterations: self.max_iter,
            scaling: self.scaling,
            ..DiscoveryConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DiscoverArgs {
    /// JSON file with `required` and `forbidden` edge lists.
    #[arg(long, value_name = "FILE")]
    pub constraints: Option<PathBuf>,

    #[command(flatten)]
    pub learn: LearnArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// DAG configuration: isolated, learned, domain or hypothetical.
    #[arg(long, default_value = "hypothetical")]
    pub kind: DagConfigKind,

    /// Previously learned graph (.json or .dot). Learned from the data when
    /// omitted and the configuration needs one.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,

    #[command(flatten)]
    pub learn: LearnArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub graph: GraphArgs,

    #[arg(long, default_value_t = 20)]
    pub replicates: usize,

    #[arg(long, default_value_t = 0.8)]
    pub subset_fraction: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Inputs to fix at their means (`all` for every input).
    #[arg(long, value_delimiter = ',', value_name = "VAR[,VAR...]")]
    pub fix: Vec<String>,

    #[command(flatten)]
    pub graph: GraphArgs,

    #[arg(long, default_value_t = 100)]
    pub trees: usize,

    #[arg(long, default_value_t = 6)]
    pub depth: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Number of rows.
    #[arg(long)]
    pub n: usize,
}
