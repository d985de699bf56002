//! Command-line surface: subcommands and flags.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "ilnet",
    version,
    about = "Positivity-constrained surrogate models for transmission-line insertion loss",
    after_help = "Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic dataset CSV.
    GenData(GenDataArgs),
    /// Train a surrogate model (nn, pdnn, or pdeeponet).
    Train(TrainArgs),
    /// Evaluate a trained model on its recorded train/test split.
    Evaluate(EvaluateArgs),
    /// Merge evaluation reports into one comparison table.
    Compare(CompareArgs),
    /// Predict insertion loss for one design point.
    Predict(PredictArgs),
    /// Fit per-curve cubic coefficients and export them as CSV.
    FitPoly(FitPolyArgs),
}

#[derive(Args, Debug)]
pub struct GenDataArgs {
    /// Number of random designs to sweep.
    #[arg(long)]
    pub designs: usize,

    /// Frequency grid as start:stop:count, GHz, inclusive linear spacing.
    #[arg(long)]
    pub freqs: String,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Gaussian label noise (dB); labels are clipped at 0.
    #[arg(long = "noise-sd", default_value_t = 0.12)]
    pub noise_sd: f64,

    /// Output CSV path.
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Nn,
    Pdnn,
    Pdeeponet,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FitArg {
    Ols,
    Nnls,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PositivityArg {
    #[value(name = "softplus_head", alias = "softplus-head")]
    SoftplusHead,
    Unconstrained,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,

    /// Training dataset CSV.
    #[arg(long)]
    pub data: PathBuf,

    /// Output model JSON path.
    #[arg(long, short = 'o')]
    pub output: PathBuf,

    /// Per-epoch trace CSV path (default: <output stem>.trace.csv).
    #[arg(long)]
    pub trace: Option<PathBuf>,

    /// Training epochs (default: 200 for nn/pdnn, 2000 for the pdeeponet
    /// branch, whose per-curve training table is far smaller).
    #[arg(long)]
    pub epochs: Option<usize>,

    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,

    #[arg(long, default_value_t = 128)]
    pub batch: usize,

    /// Seed for weight init and mini-batch shuffling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Seed of the train/test split.
    #[arg(long = "split-seed", default_value_t = 0)]
    pub split_seed: u64,

    #[arg(long = "train-fraction", default_value_t = 0.8)]
    pub train_fraction: f64,

    /// Positivity penalty weight (pdnn only; nn trains with 0).
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,

    /// Stage-1 coefficient fitting method (pdeeponet only).
    #[arg(long, value_enum, default_value_t = FitArg::Nnls)]
    pub fit: FitArg,

    /// Positivity mechanism of the pdeeponet branch head.
    #[arg(long, value_enum, default_value_t = PositivityArg::SoftplusHead)]
    pub positivity: PositivityArg,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// Dataset CSV; the model's recorded split seed reproduces its partition.
    #[arg(long)]
    pub data: PathBuf,

    /// Output report JSON path.
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Evaluation report JSON files (at least one).
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,

    /// Also write the comparison as CSV.
    #[arg(long = "output-csv")]
    pub output_csv: Option<PathBuf>,

    /// Also write the comparison as JSON.
    #[arg(long = "output-json")]
    pub output_json: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long = "via-pitch")]
    pub via_pitch: f64,

    #[arg(long = "via-radius")]
    pub via_radius: f64,

    #[arg(long = "antipad-radius")]
    pub antipad_radius: f64,

    #[arg(long = "cavity-height")]
    pub cavity_height: f64,

    #[arg(long = "trace-length")]
    pub trace_length: f64,

    #[arg(long)]
    pub permittivity: f64,

    #[arg(long = "loss-tangent")]
    pub loss_tangent: f64,

    /// Frequency in GHz.
    #[arg(long)]
    pub frequency: f64,
}

#[derive(Args, Debug)]
pub struct FitPolyArgs {
    /// Dataset CSV to group into curves and fit.
    pub data: PathBuf,

    #[arg(long, value_enum, default_value_t = FitArg::Nnls)]
    pub method: FitArg,

    /// Residual threshold (dB) above which a curve is flagged as poorly cubic.
    #[arg(long = "warn-residual", default_value_t = ilnet_core::polynomial::RESIDUAL_WARN_DB)]
    pub warn_residual: f64,

    /// Output coefficient CSV path.
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}
