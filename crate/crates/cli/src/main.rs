//! `pedtrack`: detect pedestrians in image sequences, trace them and
//! compute traffic-flow metrics.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::ConfigArgs;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, configuration or input files.
    #[error("{0}")]
    Usage(String),
    /// A stage failed on valid input, or an output could not be written.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pedtrack", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the descriptor database from image frames
    Detect(DetectArgs),
    /// Trace pedestrians into an NTXY file
    Track(TrackArgs),
    /// Compute the flow report for a time interval
    Metrics(MetricsArgs),
    /// Render a synthetic scenario with ground truth
    Synth(SynthArgs),
    /// Compare an NTXY file with ground truth
    Score(ScoreArgs),
    /// Fit the image-to-world mapping from control points
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Frame files (PPM/PGM) or one directory holding them
    #[arg(long, num_args = 1.., required = true)]
    frames: Vec<PathBuf>,
    /// Descriptor database to write
    #[arg(long, short)]
    output: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["database", "frames"]))]
struct TrackArgs {
    /// Descriptor database written by `detect`
    #[arg(long)]
    database: Option<PathBuf>,
    /// Frame files or a directory; detection runs first
    #[arg(long, num_args = 1..)]
    frames: Vec<PathBuf>,
    /// NTXY file to write
    #[arg(long, short)]
    output: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// NTXY file
    #[arg(long)]
    ntxy: PathBuf,
    /// Slice interval `T1,T2` with T1 < T2
    #[arg(long)]
    interval: String,
    /// Flow report to write
    #[arg(long, short)]
    output: PathBuf,
    /// Optional per-observation position, speed and headway series
    #[arg(long)]
    series: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Scenario file
    #[arg(long)]
    scenario: PathBuf,
    /// Directory receiving frames/, background.ppm and truth.csv
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// NTXY file in image coordinates
    #[arg(long)]
    ntxy: PathBuf,
    /// Ground truth written by `synth`
    #[arg(long)]
    truth: PathBuf,
    /// Largest centroid distance counted as a hit, in pixels
    #[arg(long = "match_radius", alias = "match-radius", default_value_t = 2.0)]
    match_radius: f64,
    /// Report file; printed to stdout when absent
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Control points with columns Xi,Yi,Xr,Yr
    #[arg(long = "control_points", alias = "control-points")]
    control_points: PathBuf,
    /// Coefficient file; printed to stdout when absent
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Detect(a) => commands::detect(&a.frames, &a.output, &a.config.resolve()?),
        Command::Track(a) => {
            commands::track(a.database.as_deref(), &a.frames, &a.output, &a.config.resolve()?)
        }
        Command::Metrics(a) => commands::metrics(
            &a.ntxy,
            &a.interval,
            &a.output,
            a.series.as_deref(),
            &a.config.resolve()?,
        ),
        Command::Synth(a) => commands::synth(&a.scenario, &a.output),
        Command::Score(a) => commands::score(&a.ntxy, &a.truth, a.match_radius, a.output.as_deref()),
        Command::Calibrate(a) => commands::calibrate(&a.control_points, a.output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pedtrack: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
