use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(name = "pointsource", version, about = "Simulate sensor data and identify point sources in parabolic models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate sensor series (plus a ground-truth sidecar) from a scenario.
    Simulate(SimulateArgs),
    /// Recover source location and intensity from sensor series.
    Identify(IdentifyArgs),
    /// Run identifiability checks on the scenario's sources and sensors.
    Diagnose(DiagnoseArgs),
    /// Tabulate the transform discrepancies of the two non-uniqueness examples.
    #[command(name = "reproduce-example")]
    ReproduceExample(ReproduceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Regularization parameter: `auto` (discrepancy principle) or a fixed value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Epsilon {
    Auto,
    Fixed(f64),
}

impl FromStr for Epsilon {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Epsilon::Auto);
        }
        let v: f64 = s.parse().map_err(|_| format!("expected `auto` or a number, got `{s}`"))?;
        if v >= 0.0 && v.is_finite() {
            Ok(Epsilon::Fixed(v))
        } else {
            Err(format!("epsilon must be finite and nonnegative, got {v}"))
        }
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Noise standard deviation; overrides the scenario.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Noise seed; overrides the scenario.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sensor data format (default csv).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write field snapshots every N steps (interval domains only).
    #[arg(long)]
    pub field_stride: Option<usize>,
}

#[derive(Args, Debug, Clone, Copy, Default)]
pub struct LambdaArgs {
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Number of geometric λ points (1D); the multidimensional ladder uses unit steps in √λ.
    #[arg(long)]
    pub lambda_points: Option<usize>,
}

#[derive(Args, Debug)]
pub struct IdentifyArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Sensor data (default: `<out>/sensors.csv`, then `<out>/sensors.json`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Ground truth sidecar (default: `<out>/truth.json` if present).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub lambda: LambdaArgs,
    #[arg(long, default_value = "auto")]
    pub epsilon: Epsilon,
    /// Report format (default json).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Upper bound on the number of sources (default: sources in the scenario).
    #[arg(long)]
    pub max_sources: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// Which example: 1 (opposite sources, bisector probes) or 2 (two source pairs, axis probes).
    #[arg(value_parser = clap::value_parser!(u8).range(1..=2))]
    pub which: u8,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Source offset `a`.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Axis probe distance `M` (example 2).
    #[arg(long, default_value_t = 3.0)]
    pub m: f64,
    /// Dimension (example 1).
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Number of bisector probes (example 1).
    #[arg(long, default_value_t = 20)]
    pub probes: usize,
    /// Probe radius on the bisector (example 1).
    #[arg(long, default_value_t = 4.0)]
    pub radius: f64,
    /// Comma-separated λ values (default 1,10,100 for example 1 and 10 for example 2).
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Vec<f64>,
    /// Extra probe `x,y,z` (example 2; default 1,2,0).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub extra_probe: Vec<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}
