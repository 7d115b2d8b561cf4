//! Command-line grammar and the optional flat JSON config file.
//!
//! Every flag may also be given in the `--config` file under its long name
//! with `-` replaced by `_`; a flag on the command line overrides the file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "pulsedose", version, about = "Pulse-modulated dosing controller studies")]
pub struct Cli {
    /// Flat JSON object supplying default values for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory receiving the command's output files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Format of the report printed to stdout.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed point of the target 1-cycle.
    FixedPoint {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Analytic stability test of the 1-cycle for a slope pair.
    Stability {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        slopes: SlopeArgs,
        /// Also locate the amplitude- and frequency-only Hopf slopes.
        #[arg(long)]
        hopf: bool,
    },
    /// Modulation law realising a slope pair around the target cycle.
    Design {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        slopes: SlopeArgs,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Exact hybrid simulation of one patient.
    Simulate {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Spectral radius of the linearised cycle map over a slope box.
    Sweep {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Population evaluation of a dosing policy against effect bounds.
    Evaluate {
        #[command(flatten)]
        cohort: CohortArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Lower clinical effect bound (%).
        #[arg(long)]
        y_min: Option<f64>,
        /// Upper clinical effect bound (%).
        #[arg(long)]
        y_max: Option<f64>,
        /// Case label recorded in the report.
        #[arg(long)]
        label: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FixedPoint { .. } => "fixed-point",
            Command::Stability { .. } => "stability",
            Command::Design { .. } => "design",
            Command::Simulate { .. } => "simulate",
            Command::Sweep { .. } => "sweep",
            Command::Evaluate { .. } => "evaluate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    /// Pulse-modulated feedback.
    Feedback,
    /// A fixed dose schedule.
    OpenLoop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    Amplitude,
    Frequency,
    Joint,
}

/// Patient parameters; the population mean by default.
#[derive(Debug, Args)]
pub struct PlantArgs {
    /// Elimination-rate parameter (1/min).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Hill exponent.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Half-effect concentration (μg/ml).
    #[arg(long)]
    pub c50: Option<f64>,
}

/// The target 1-cycle.
#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Dosing period (min).
    #[arg(long = "T", value_name = "MIN")]
    pub period: Option<f64>,
    /// Dose per period (μg/kg).
    #[arg(long)]
    pub lambda: Option<f64>,
}

/// Modulation slopes in linear-output coordinates.
#[derive(Debug, Args)]
pub struct SlopeArgs {
    /// Amplitude slope (≤ 0).
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<f64>,
    /// Frequency slope (≥ 0).
    #[arg(long)]
    pub eta: Option<f64>,
}

/// Saturation bounds of the modulation law.
#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Shortest inter-dose interval (min).
    #[arg(long)]
    pub phi_lo: Option<f64>,
    /// Longest inter-dose interval (min).
    #[arg(long)]
    pub phi_hi: Option<f64>,
    /// Smallest dose (μg/kg).
    #[arg(long)]
    pub f_lo: Option<f64>,
    /// Largest dose (μg/kg).
    #[arg(long)]
    pub f_hi: Option<f64>,
}

/// The dosing policy of a simulation or evaluation. Without `--modulation`
/// the feedback law is designed for the population-mean patient from the
/// target, slope and bound flags.
#[derive(Debug, Args)]
pub struct PolicyArgs {
    #[arg(long, value_enum)]
    pub policy: Option<PolicyKind>,
    /// Modulation law as written by `design` (or a bare law object).
    #[arg(long, value_name = "FILE")]
    pub modulation: Option<PathBuf>,
    /// Dose schedule CSV with header `time_min,dose`; the reference
    /// bolus-plus-maintenance protocol by default.
    #[arg(long, value_name = "FILE")]
    pub schedule: Option<PathBuf>,
    /// Force the first feedback dose to this bolus (μg/kg).
    #[arg(long)]
    pub bolus: Option<f64>,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub slopes: SlopeArgs,
    #[command(flatten)]
    pub bounds: BoundsArgs,
}

/// Simulation horizon and sample grid.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Simulated time (min); twelve periods by default.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Sample spacing (min).
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub mode: Option<SweepMode>,
    /// Grid points per swept axis.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi_max: Option<f64>,
    #[arg(long)]
    pub eta_min: Option<f64>,
    #[arg(long)]
    pub eta_max: Option<f64>,
}

/// Where the patients come from: a cohort file, or a seeded synthetic draw.
#[derive(Debug, Args)]
pub struct CohortArgs {
    /// Cohort CSV with header `pin,alpha,gamma`.
    #[arg(long, value_name = "FILE")]
    pub cohort: Option<PathBuf>,
    /// Size of a synthetic cohort.
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed of a synthetic cohort.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Log-mean of the α law.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_mu: Option<f64>,
    /// Log-standard deviation of the α law.
    #[arg(long)]
    pub alpha_sigma: Option<f64>,
    /// Log-mean of the γ law.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_mu: Option<f64>,
    /// Log-standard deviation of the γ law.
    #[arg(long)]
    pub gamma_sigma: Option<f64>,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub c50: Option<f64>,
    #[serde(rename = "T")]
    pub period: Option<f64>,
    pub lambda: Option<f64>,
    pub xi: Option<f64>,
    pub eta: Option<f64>,
    pub phi_lo: Option<f64>,
    pub phi_hi: Option<f64>,
    pub f_lo: Option<f64>,
    pub f_hi: Option<f64>,
    pub hopf: Option<bool>,
    pub policy: Option<PolicyKind>,
    pub modulation: Option<PathBuf>,
    pub schedule: Option<PathBuf>,
    pub bolus: Option<f64>,
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub mode: Option<SweepMode>,
    pub points: Option<usize>,
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
    pub eta_min: Option<f64>,
    pub eta_max: Option<f64>,
    pub cohort: Option<PathBuf>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub alpha_mu: Option<f64>,
    pub alpha_sigma: Option<f64>,
    pub gamma_mu: Option<f64>,
    pub gamma_sigma: Option<f64>,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub label: Option<String>,
}
