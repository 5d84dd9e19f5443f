use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

/// Directional statistics and frame potentials for spherical and axial data.
#[derive(Debug, Parser)]
#[command(name = "dirframe", version)]
pub struct Cli {
    /// Worker threads for parallel sections (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Read and report angles in degrees instead of radians
    #[arg(long, global = true)]
    pub degrees: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a seeded sample and write it as CSV
    Synth(SynthArgs),
    /// Test a sample for uniformity
    Test(TestArgs),
    /// Frame bounds, tightness, harmonic frames, tightening and potentials
    #[command(subcommand)]
    Frame(FrameCommand),
    /// Global and local nematic order of a rod file
    Order(OrderArgs),
    /// Fit a planar Watson mixture by EM
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Uniform,
    Watson,
    Mixture,
    FntfMixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleFormat {
    Vectors,
    Theta,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub model: Model,

    #[arg(long)]
    pub n: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Ambient dimension (uniform and watson)
    #[arg(long, default_value_t = 2)]
    pub dim: usize,

    /// Shared concentration
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,

    /// Per-component concentrations (mixture)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub kappas: Option<Vec<f64>>,

    /// Planar director angle (watson, d = 2)
    #[arg(long, allow_negative_numbers = true)]
    pub angle: Option<f64>,

    /// Director coordinates (watson)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub director: Option<Vec<f64>>,

    /// Planar director angles (mixture)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub angles: Option<Vec<f64>>,

    /// Component weights, rescaled to sum to 1 (mixture)
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,

    /// Number of harmonic directors (fntf-mixture)
    #[arg(long)]
    pub components: Option<usize>,

    #[arg(long, value_enum, default_value_t = SampleFormat::Vectors)]
    pub format: SampleFormat,

    /// Output CSV; without it the CSV goes to stdout and the report to stderr
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Rayleigh,
    ModifiedRayleigh,
    Bingham,
    All,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long = "in")]
    pub input: PathBuf,

    #[arg(long, value_enum, default_value_t = Method::All)]
    pub method: Method,

    /// Significance level of the reported decision
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
}

#[derive(Debug, Subcommand)]
pub enum FrameCommand {
    /// Optimal frame bounds of the sample vectors
    Bounds(InputArgs),
    /// Whether the sample is a finite unit norm tight frame
    Check(CheckArgs),
    /// Harmonic unit norm tight frame of R^2
    Harmonic(HarmonicArgs),
    /// Gradient descent of the frame potential towards a tight frame
    Tighten(TightenArgs),
    /// Frame, Riesz and fractional potentials of the counting measure
    Potential(InputArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long = "in")]
    pub input: PathBuf,

    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct HarmonicArgs {
    #[arg(long)]
    pub n: usize,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TightenArgs {
    #[arg(long = "in")]
    pub input: PathBuf,

    /// Stop once the frame potential is within this of 1/d
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    #[arg(long, default_value_t = 10_000)]
    pub max_steps: usize,

    /// Defaults to 0.25/n
    #[arg(long)]
    pub step_size: Option<f64>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Write the tightened vectors here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    /// Rod CSV with columns x,y,theta
    #[arg(long = "in")]
    pub input: PathBuf,

    /// Neighbourhood radius of the local field; no field without it
    #[arg(long)]
    pub radius: Option<f64>,

    /// Lattice spacing of the field (defaults to the radius)
    #[arg(long)]
    pub cell_size: Option<f64>,

    #[arg(long, default_value_t = dirframe::order::DEFAULT_MIN_COUNT)]
    pub min_count: usize,

    /// Write the per-cell table here
    #[arg(long)]
    pub field_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,

    #[arg(long)]
    pub components: usize,

    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    pub shared_kappa: bool,

    /// Hold the weights at 1/N
    #[arg(long)]
    pub equal_weights: bool,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,

    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}
