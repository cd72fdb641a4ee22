use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::parse::{self, Delays, Grid};

/// Seed used when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 20_061_001;
/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ANYTIME_PPM_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "anytime-ppm", version, about = "Anytime repeated-PPM code on the infinite-bandwidth AWGN channel")]
pub struct Cli {
    /// key=value file of default flags; command-line flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exponent and capacity tables over an eb or rate grid
    Theory(TheoryArgs),
    /// Genie-aided suffix error against delay
    SimGenie(GenieArgs),
    /// Anytime decoder error for one bit position against delay
    SimAnytime(AnytimeArgs),
    /// M-ary orthogonal block baseline
    SimBlock(BlockArgs),
    /// Earliest-error age histogram of the tentative decisions
    SimFeedback(FeedbackArgs),
    /// Cost-constrained burst scheme over a discrete channel
    SimCost(CostArgs),
    /// Re-fit the delay exponent of a stored curve
    Fit(FitArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Theory(_) => "theory",
            Command::SimGenie(_) => "sim-genie",
            Command::SimAnytime(_) => "sim-anytime",
            Command::SimBlock(_) => "sim-block",
            Command::SimFeedback(_) => "sim-feedback",
            Command::SimCost(_) => "sim-cost",
            Command::Fit(_) => "fit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file [default: $ANYTIME_PPM_OUT_DIR/<command>.<format>, else stdout]
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Signal-to-noise: exactly one of the two.
#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct SnrArgs {
    /// Energy per bit over N0 (accepts `ln2` multiples, e.g. 4ln2)
    #[arg(long, value_parser = parse::number)]
    pub eb: Option<f64>,

    /// Rate as a fraction of capacity, ln2/eb
    #[arg(long, value_parser = parse::number)]
    pub rate_fraction: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Worker threads; results do not depend on it
    #[arg(long)]
    pub workers: Option<usize>,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct GridChoice {
    /// Geometric eb grid lo:hi:count
    #[arg(long, value_parser = parse::grid)]
    pub eb_grid: Option<Grid>,

    /// Linear rate grid lo:hi:count
    #[arg(long, value_parser = parse::grid)]
    pub rate_grid: Option<Grid>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub grid: GridChoice,

    /// Infinite-bandwidth capacity P/N0, nats per second
    #[arg(long, value_parser = parse::number, default_value = "1")]
    pub c_inf: f64,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenieArgs {
    #[command(flatten)]
    pub snr: SnrArgs,

    /// Delays in bit-slots: lo:hi or a,b,c
    #[arg(long, value_parser = parse::delays, default_value = "0:10")]
    pub delays: Delays,

    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnytimeArgs {
    #[command(flatten)]
    pub snr: SnrArgs,

    /// Bit position, from 1
    #[arg(long, default_value_t = 1)]
    pub bit_index: u32,

    #[arg(long, value_parser = parse::delays, default_value = "0:10")]
    pub delays: Delays,

    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BlockArgs {
    #[command(flatten)]
    pub snr: SnrArgs,

    /// Number of orthogonal messages M
    #[arg(long, default_value_t = 16)]
    pub messages: u64,

    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FeedbackArgs {
    #[command(flatten)]
    pub snr: SnrArgs,

    /// Stream length n in bit-slots
    #[arg(long, default_value_t = 12)]
    pub length: u32,

    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct CostChoice {
    /// Cost per bit
    #[arg(long, value_parser = parse::number)]
    pub eb_cost: Option<f64>,

    /// Cost per bit as a multiple of ln2 / (capacity per unit cost)
    #[arg(long, value_parser = parse::number)]
    pub threshold_multiple: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CostArgs {
    /// Channel description file
    #[arg(long, value_name = "FILE")]
    pub dmc: PathBuf,

    #[command(flatten)]
    pub cost: CostChoice,

    /// Bits per burst L
    #[arg(long, default_value_t = 2)]
    pub burst_length: u32,

    /// Delays in bits
    #[arg(long, value_parser = parse::delays, default_value = "0:10")]
    pub delays: Delays,

    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// Curve CSV with columns d, trials, errors, p_hat
    pub curve: PathBuf,

    /// Ignore points with smaller delay
    #[arg(long, default_value_t = 0)]
    pub from_d: u32,

    #[command(flatten)]
    pub out: OutputArgs,
}
