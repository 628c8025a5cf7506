//! Run configuration: JSON file schema plus flag/env/file precedence.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qfridge_core::MachineSpec;
use serde::Deserialize;

use crate::{Cli, OutputFormat};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const TOL_ENV_VAR: &str = "QFRIDGE_TOL";

const DEFAULT_BETA_H: f64 = 1.0;
const DEFAULT_BETA_C: f64 = 2.0;
const DEFAULT_OMEGA_H: f64 = 2.0;
const DEFAULT_OMEGA_C: f64 = 0.4;

/// On-disk JSON configuration. Every field is optional; command-line flags
/// override whatever is present.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub machine: Option<MachineConfig>,
    #[serde(default)]
    pub catalyst: Option<CatalystConfig>,
    #[serde(default)]
    pub permutation: Option<PermutationField>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_prime: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineConfig {
    #[serde(default)]
    pub beta_h: Option<f64>,
    #[serde(default)]
    pub beta_c: Option<f64>,
    #[serde(default)]
    pub omega_h: Option<f64>,
    #[serde(default)]
    pub omega_c: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalystConfig {
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub p: Option<CatalystField>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged, expecting = "a permutation name (\"pi_opt\", \"pi_1\", \"pi_2\") or an index array")]
pub enum PermutationField {
    Name(String),
    Map(Vec<usize>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged, expecting = "\"stationary\" or an array of probabilities")]
pub enum CatalystField {
    Name(String),
    Weights(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// Which cycle permutation a run should use, after all sources are merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermutationChoice {
    PiOpt,
    Pi1,
    Pi2,
    Literal(Vec<usize>),
}

/// Which catalyst distribution a run should use.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalystChoice {
    Stationary,
    Explicit(Vec<f64>),
}

/// Fully resolved settings shared by every subcommand.
#[derive(Debug)]
pub struct Settings {
    pub spec: MachineSpec,
    pub tol: f64,
    pub seed: u64,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub config: RunConfig,
}

impl Settings {
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let config = match &cli.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        let machine = config.machine.as_ref();
        let pick = |flag: Option<f64>, file: Option<f64>, default: f64| {
            flag.or(file).unwrap_or(default)
        };
        let spec = MachineSpec::new(
            pick(cli.beta_h, machine.and_then(|m| m.beta_h), DEFAULT_BETA_H),
            pick(cli.beta_c, machine.and_then(|m| m.beta_c), DEFAULT_BETA_C),
            pick(cli.omega_h, machine.and_then(|m| m.omega_h), DEFAULT_OMEGA_H),
            pick(cli.omega_c, machine.and_then(|m| m.omega_c), DEFAULT_OMEGA_C),
        )
        .context("invalid machine parameters")?;

        let tol = match cli.tol {
            Some(tol) => tol,
            None => match std::env::var(TOL_ENV_VAR) {
                Ok(raw) => raw
                    .trim()
                    .parse::<f64>()
                    .with_context(|| format!("{TOL_ENV_VAR} is not a number: {raw:?}"))?,
                Err(_) => config.tol.unwrap_or(DEFAULT_TOL),
            },
        };
        if !(tol > 0.0 && tol.is_finite()) {
            bail!("tolerance must be a positive finite number, got {tol}");
        }

        let seed = cli.seed.or(config.seed).unwrap_or(0);
        let out = config.output.as_ref();
        let format = cli
            .format
            .or(out.and_then(|o| o.format))
            .unwrap_or(OutputFormat::Csv);
        let output = cli
            .output
            .clone()
            .or_else(|| out.and_then(|o| o.path.clone()));

        Ok(Settings {
            spec,
            tol,
            seed,
            format,
            output,
            config,
        })
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&raw).with_context(|| format!("parsing config {}", path.display()))
}

/// Merges the permutation selection: flag first, then config, then `pi_opt`.
pub fn permutation_choice(flag: Option<&str>, config: &RunConfig) -> Result<PermutationChoice> {
    if let Some(raw) = flag {
        return parse_permutation(raw);
    }
    match &config.permutation {
        Some(PermutationField::Name(name)) => parse_permutation(name),
        Some(PermutationField::Map(map)) => Ok(PermutationChoice::Literal(map.clone())),
        None => Ok(PermutationChoice::PiOpt),
    }
}

fn parse_permutation(raw: &str) -> Result<PermutationChoice> {
    match raw.trim() {
        "pi_opt" => Ok(PermutationChoice::PiOpt),
        "pi_1" => Ok(PermutationChoice::Pi1),
        "pi_2" => Ok(PermutationChoice::Pi2),
        trimmed if trimmed.starts_with('[') => {
            let map: Vec<usize> = serde_json::from_str(trimmed)
                .with_context(|| format!("invalid permutation array {trimmed:?}"))?;
            Ok(PermutationChoice::Literal(map))
        }
        other => bail!(
            "unknown permutation {other:?}; expected pi_opt, pi_1, pi_2, or a JSON index array"
        ),
    }
}

/// Merges the catalyst selection: flag first, then config, then stationary.
pub fn catalyst_choice(flag: Option<&str>, config: &RunConfig) -> Result<CatalystChoice> {
    if let Some(raw) = flag {
        return parse_catalyst(raw);
    }
    match config.catalyst.as_ref().and_then(|c| c.p.as_ref()) {
        Some(CatalystField::Name(name)) => parse_catalyst(name),
        Some(CatalystField::Weights(p)) => Ok(CatalystChoice::Explicit(p.clone())),
        None => Ok(CatalystChoice::Stationary),
    }
}

fn parse_catalyst(raw: &str) -> Result<CatalystChoice> {
    match raw.trim() {
        "stationary" => Ok(CatalystChoice::Stationary),
        trimmed if trimmed.starts_with('[') => {
            let p: Vec<f64> = serde_json::from_str(trimmed)
                .with_context(|| format!("invalid catalyst array {trimmed:?}"))?;
            Ok(CatalystChoice::Explicit(p))
        }
        other => bail!("unknown catalyst {other:?}; expected stationary or a JSON probability array"),
    }
}
