use std::path::{Path, PathBuf};

use noon_core::{DetectorKind, Parity};
use serde::{Deserialize, Serialize};

use crate::angle::parse_angle;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolChoice {
    Cascade,
    Resolving,
}

/// An angle in a config file: radians or a `pi/k` token.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleValue {
    Radians(f64),
    Token(String),
}

impl AngleValue {
    pub fn radians(&self) -> Result<f64, CliError> {
        match self {
            AngleValue::Radians(r) if r.is_finite() => Ok(*r),
            AngleValue::Radians(r) => Err(CliError::usage(format!("angle must be finite, got {r}"))),
            AngleValue::Token(t) => parse_angle(t).map_err(CliError::usage),
        }
    }
}

/// Every parameter a command may take. Values come from `--config` first and
/// are then overridden by flags given on the command line.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(alias = "N")]
    pub photons: Option<u32>,
    #[serde(alias = "M")]
    pub phase_multiplier: Option<u32>,
    pub phi: Option<AngleValue>,
    pub rho: Option<f64>,
    pub uniform_rho: Option<f64>,
    /// Unit 1 (nearest the output) first.
    pub schedule: Option<Vec<f64>>,
    pub optimal: Option<bool>,
    pub optimize: Option<bool>,
    pub parity: Option<Parity>,
    pub protocol: Option<ProtocolChoice>,
    pub detector: Option<DetectorKind>,
    pub eta: Option<f64>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub shards: Option<usize>,
    pub simulate: Option<bool>,
    pub which_way: Option<bool>,
    pub target: Option<f64>,
    #[serde(alias = "N_min")]
    pub n_min: Option<u32>,
    #[serde(alias = "N_max")]
    pub n_max: Option<u32>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: RunConfig) -> Self {
        overlay!(
            self, top, photons, phase_multiplier, phi, rho, uniform_rho, schedule, optimal,
            optimize, parity, protocol, detector, eta, shots, seed, shards, simulate, which_way,
            target, n_min, n_max, format, out,
        );
        self
    }

    pub fn photons(&self) -> Result<u32, CliError> {
        self.photons.ok_or_else(|| CliError::usage("--N is required"))
    }

    pub fn phi(&self) -> Result<f64, CliError> {
        self.phi.as_ref().map_or(Ok(0.0), AngleValue::radians)
    }

    pub fn flag(value: Option<bool>) -> bool {
        value.unwrap_or(false)
    }
}
