//! Command-line arguments and config files. Flags override file values.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use vkde::estimators::{EstimatorKind, PilotMode};
use vkde::simlab::{ExperimentKind, Setting};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "vkde", version, about = "Variable-bandwidth kernel density estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a density from data on a grid.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment.
    Simulate(SimulateArgs),
    /// IMSE-optimal main bandwidth for an oracle model.
    Bandwidth(BandwidthArgs),
    /// Pilot rate diagnostic U(h1) and its ratio to h2^2.
    Diagnose(DiagnoseArgs),
    /// Kernel moment functionals as JSON.
    Moments(MomentsArgs),
}

fn parse_setting(s: &str) -> Result<Setting, String> {
    s.parse::<Setting>().map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> Result<EstimatorKind, String> {
    s.parse::<EstimatorKind>().map_err(|e| e.to_string())
}

fn parse_experiment(s: &str) -> Result<ExperimentKind, String> {
    s.parse::<ExperimentKind>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PilotArg {
    LeaveSelfIn,
    LeaveOneOut,
}

impl From<PilotArg> for PilotMode {
    fn from(p: PilotArg) -> Self {
        match p {
            PilotArg::LeaveSelfIn => PilotMode::LeaveSelfIn,
            PilotArg::LeaveOneOut => PilotMode::LeaveOneOut,
        }
    }
}

/// Settings of the `estimate` subcommand, as read from a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateFile {
    pub kind: Option<EstimatorKind>,
    pub kernel: Option<String>,
    pub model: Option<String>,
    pub h: Option<Setting>,
    pub h1: Option<Setting>,
    pub h2: Option<Setting>,
    pub c: Option<Setting>,
    pub c_quantile: Option<f64>,
    pub clip: Option<String>,
    pub t0: Option<f64>,
    pub b: Option<f64>,
    pub pilot: Option<PilotArg>,
    pub data: Option<PathBuf>,
    pub grid: Option<usize>,
    pub grid_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub svg: Option<bool>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EstimateArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// classical, ideal-vkde, plugin-vkde, abramson, hall-marron or hhm.
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<EstimatorKind>,
    #[arg(long)]
    pub kernel: Option<String>,
    /// Oracle model for the ideal, Abramson, Hall-Marron and HHM estimators.
    #[arg(long)]
    pub model: Option<String>,
    /// Bandwidth for single-bandwidth estimators, or `auto`.
    #[arg(long, value_parser = parse_setting)]
    pub h: Option<Setting>,
    /// Pilot bandwidth, or `auto` (n^{-1/(4+d)}).
    #[arg(long, value_parser = parse_setting)]
    pub h1: Option<Setting>,
    /// Main bandwidth, or `auto` (n^{-1/(8+d)}).
    #[arg(long, value_parser = parse_setting)]
    pub h2: Option<Setting>,
    /// Clipping constant, or `auto` (from the pilot values' lower quantile).
    #[arg(long, value_parser = parse_setting)]
    pub c: Option<Setting>,
    #[arg(long)]
    pub c_quantile: Option<f64>,
    #[arg(long)]
    pub clip: Option<String>,
    #[arg(long)]
    pub t0: Option<f64>,
    /// HHM window constant (`inf` disables the indicator).
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, value_enum)]
    pub pilot: Option<PilotArg>,
    /// Data file: one observation per line, comma or whitespace separated.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Number of grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Evaluation points from a file instead of a uniform grid.
    #[arg(long)]
    pub grid_file: Option<PathBuf>,
    /// Output CSV (t, fhat).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot next to the CSV.
    #[arg(long)]
    pub svg: bool,
}

impl EstimateArgs {
    /// Merges the optional config file under the flags.
    pub fn merged(&self) -> Result<EstimateFile, CliError> {
        let mut f: EstimateFile = match &self.config {
            Some(p) => read_config(p)?,
            None => EstimateFile::default(),
        };
        macro_rules! over {
            ($($field:ident),*) => { $( if self.$field.is_some() { f.$field = self.$field.clone(); } )* };
        }
        over!(kind, kernel, model, h, h1, h2, c, c_quantile, clip, t0, b, pilot, data, grid, grid_file, out);
        if self.svg {
            f.svg = Some(true);
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// bias, variance, clt, figure1 or sweep.
    #[arg(long, value_parser = parse_experiment)]
    pub experiment: Option<ExperimentKind>,
    /// JSON experiment config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of replicates M.
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long, value_parser = parse_setting)]
    pub c: Option<Setting>,
    /// Single replicate at n = 50,000 (tail comparison only).
    #[arg(long)]
    pub full_scale: bool,
    /// Render plot-data CSVs as SVG line plots.
    #[arg(long)]
    pub svg: bool,
    /// Run replicates on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BandwidthArgs {
    #[arg(long, default_value = "normal")]
    pub model: String,
    #[arg(long, default_value = "tricube")]
    pub kernel: String,
    /// Clipping constant; `auto` is 0.3.
    #[arg(long, default_value = "auto", value_parser = parse_setting)]
    pub c: Setting,
    #[arg(long)]
    pub clip: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    pub t0: f64,
    #[arg(long)]
    pub n: usize,
    /// Region level r, or `auto` (1.25·t0·c²).
    #[arg(long, default_value = "auto", value_parser = parse_setting)]
    pub r: Setting,
    /// Write the IMSE curve here as CSV (h, imse).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DiagnoseArgs {
    #[arg(long, value_parser = parse_setting)]
    pub h1: Setting,
    #[arg(long, value_parser = parse_setting)]
    pub h2: Setting,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MomentsArgs {
    #[arg(long, default_value = "tricube")]
    pub kernel: String,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Highest even order of τ_v.
    #[arg(long, default_value_t = 4)]
    pub order: u32,
}

pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}
