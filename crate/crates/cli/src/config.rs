//! Command-line flags and run configurations.
//!
//! Each subcommand has a flag struct (every field optional) and a resolved
//! configuration. Flags are turned into a JSON object, the `--config` file
//! is laid over it key by key, and the result is deserialized with unknown
//! keys rejected.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

fn is_false(b: &bool) -> bool {
    !*b
}

fn one() -> usize {
    1
}

/// Merges `file` over the flags and deserializes the result.
pub fn resolve<A: Serialize, C: DeserializeOwned>(flags: &A, file: Option<&Path>) -> CliResult<C> {
    let mut merged = match serde_json::to_value(flags).map_err(|e| CliError::Schema(e.to_string()))? {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let overrides: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Schema(format!("config {} is not valid JSON: {e}", path.display())))?;
        match overrides {
            Value::Object(m) => merged.extend(m),
            _ => {
                return Err(CliError::Schema(format!(
                    "config {} must be a JSON object",
                    path.display()
                )))
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Schema(e.to_string()))
}

/// `start:stop:count` with `count >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn parse(text: &str) -> CliResult<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || CliError::Usage(format!("range '{text}' is not start:stop:count"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        Ok(Self { start, stop, count })
    }

    pub fn linear(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }

    pub fn log(&self) -> CliResult<Vec<f64>> {
        if !(self.start > 0.0 && self.stop > 0.0) {
            return Err(CliError::Usage("log spacing needs positive bounds".into()));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let ratio = (self.stop / self.start).ln() / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start * (ratio * i as f64).exp()
                }
            })
            .collect())
    }
}

/// `NTHETAxNPHI`.
pub fn parse_grid(text: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Usage(format!("grid '{text}' is not NTHETAxNPHI"));
    let (a, b) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    Max,
}

// ---- evolve ----

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct EvolveArgs {
    /// Total spin S (multiple of 1/2).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin: Option<f64>,
    /// Twisting strength mu.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Excess-noise strength mu' (defaults to |mu|).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_prime: Option<f64>,
    /// Apply the pulse this many times.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulses: Option<usize>,
    /// Report JSON path (stdout if absent).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Dense density-matrix CSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix_output: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub spin: f64,
    pub mu: f64,
    #[serde(default)]
    pub mu_prime: Option<f64>,
    #[serde(default = "one")]
    pub pulses: usize,
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub matrix_output: Option<PathBuf>,
}

// ---- qpd ----

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct QpdArgs {
    /// Total spin S.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin: Option<f64>,
    /// Twisting strength mu.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Excess-noise strength mu' (defaults to |mu|).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_prime: Option<f64>,
    /// Resolution as NTHETAxNPHI.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    /// Scale of the written Q values.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
    /// CSV path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Squeezing report JSON for the same state.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

fn default_grid() -> String {
    "128x256".into()
}

fn default_normalization() -> Normalization {
    Normalization::Max
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QpdConfig {
    pub spin: f64,
    pub mu: f64,
    #[serde(default)]
    pub mu_prime: Option<f64>,
    #[serde(default = "default_grid")]
    pub grid: String,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
    #[serde(skip_serializing)]
    pub output: PathBuf,
    #[serde(default, skip_serializing)]
    pub report: Option<PathBuf>,
}

// ---- sweep-mu ----

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct SweepMuArgs {
    /// Total spin S.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin: Option<f64>,
    /// mu values as start:stop:count.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_grid: Option<String>,
    /// Spacing of the mu grid.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
    /// Use mu' = mu at every point.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub equal_mu_prime: bool,
    /// Fixed mu' for every point.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_prime: Option<f64>,
    /// CSV path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_spacing() -> Spacing {
    Spacing::Linear
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepMuConfig {
    pub spin: f64,
    pub mu_grid: String,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
    #[serde(default)]
    pub equal_mu_prime: bool,
    #[serde(default)]
    pub mu_prime: Option<f64>,
    #[serde(skip_serializing)]
    pub output: PathBuf,
}

// ---- sweep-s ----

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct SweepSArgs {
    /// Spins as start:stop:count, log-spaced.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_range: Option<String>,
    /// CSV path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Fit summary JSON (stdout if absent).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSConfig {
    pub log_range: String,
    #[serde(skip_serializing)]
    pub output: PathBuf,
    #[serde(default, skip_serializing)]
    pub summary: Option<PathBuf>,
}

// ---- feasibility ----

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct FeasibilityArgs {
    /// Start from a named setup (yb171).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Resonance wavelength, m.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    /// Natural linewidth, rad/s.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_natural: Option<f64>,
    /// Detuning, rad/s.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning: Option<f64>,
    /// Peak power, W.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    /// Pulse duration, s.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Beam waist, m.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waist: Option<f64>,
    /// Total spin S of the ensemble.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_spin: Option<f64>,
    /// Sample length, m.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_length: Option<f64>,
    /// Also plan a pulse for this mu.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_mu: Option<f64>,
    /// Report JSON path (stdout if absent).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityConfig {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub lambda0: Option<f64>,
    #[serde(default)]
    pub gamma_natural: Option<f64>,
    #[serde(default)]
    pub detuning: Option<f64>,
    #[serde(default)]
    pub power: Option<f64>,
    #[serde(default)]
    pub duration: Option<f64>,
    #[serde(default)]
    pub waist: Option<f64>,
    #[serde(default)]
    pub total_spin: Option<f64>,
    #[serde(default)]
    pub sample_length: Option<f64>,
    #[serde(default)]
    pub target_mu: Option<f64>,
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
}

// ---- verify-oracle ----

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct VerifyOracleArgs {
    /// Mean photon number of the Fock-lattice case.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_photons: Option<f64>,
    /// Photon cutoff of the Fock lattice.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cut: Option<usize>,
    /// CSV path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_mean_photons() -> f64 {
    8.0
}

fn default_n_cut() -> usize {
    32
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOracleConfig {
    #[serde(default = "default_mean_photons")]
    pub mean_photons: f64,
    #[serde(default = "default_n_cut")]
    pub n_cut: usize,
    #[serde(skip_serializing)]
    pub output: PathBuf,
}
