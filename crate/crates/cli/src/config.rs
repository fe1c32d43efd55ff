//! Run configuration: the TOML document shared by every subcommand, the
//! built-in presets, and the resolution of command-line overrides into an
//! effective configuration with a content hash.
//!
//! The hash covers everything that influences computed numbers (potential,
//! packets, propagator knobs, sampling, grid, time window, requested curves)
//! and deliberately excludes the output location, so re-running the same
//! physics into another directory reproduces the same recorded identity.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ehk_core::{EhkConfig, GaussianPacket, GridConfig, PotentialSpec, MASS};

use crate::error::CliError;

/// Version of the configuration document this binary understands.
pub const SCHEMA_VERSION: u32 = 1;

/// Which propagator computes a correlation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagator {
    /// Plain Herman-Kluk sum over real trajectories.
    Hk,
    /// Herman-Kluk extended below the barrier by turning-point jumps.
    #[default]
    Ehk,
    /// Split-operator grid reference.
    Oracle,
}

/// The initial and final wave packets of the cross-correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketPair {
    pub initial: GaussianPacket,
    #[serde(rename = "final")]
    pub final_: GaussianPacket,
}

/// Monte Carlo ensemble controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    /// Ensemble size.
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    /// Seed of the deterministic phase-space draw.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Relative tolerance of the trajectory integrator.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_n_traj() -> usize {
    10_000
}

fn default_seed() -> u64 {
    1
}

fn default_tol() -> f64 {
    1e-8
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            n_traj: default_n_traj(),
            seed: default_seed(),
            tol: default_tol(),
        }
    }
}

/// Uniform sampling window for correlation functions: `n_samples` equal
/// steps from 0 to `t_max` inclusive. A zero-length window means the single
/// instant t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    pub t_max: f64,
    pub n_samples: usize,
}

impl TimeWindow {
    /// The sample instants, strictly increasing from 0.
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(CliError::Config(format!(
                "times.t_max must be finite and nonnegative, got {}",
                self.t_max
            )));
        }
        if self.t_max == 0.0 {
            return Ok(vec![0.0]);
        }
        if self.n_samples == 0 {
            return Err(CliError::Config(
                "times.n_samples must be at least 1 for a nonzero window".to_string(),
            ));
        }
        let n = self.n_samples;
        Ok((0..=n).map(|i| self.t_max * i as f64 / n as f64).collect())
    }
}

/// One transmission curve to compute and tag in the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMethod {
    /// Invert a correlation from the turning-point-extended propagator.
    Ehk,
    /// Invert a plain Herman-Kluk correlation.
    Hk,
    /// Invert the grid-reference correlation.
    Oracle,
    /// Closed-form uniform WKB transmission.
    UniformWkb,
    /// Exact transmission of the sech² barrier.
    Exact,
}

/// Energy grid and method list of a `transmit` run. Energies are expressed
/// relative to the barrier height so the same section works across barriers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionRequest {
    pub e_min_over_v0: f64,
    pub e_max_over_v0: f64,
    pub n_energies: usize,
    pub methods: Vec<CurveMethod>,
}

/// A complex-plane start q = x + iy, dq/dt = vx + i vy at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasStart {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

/// Orbit batch of an `atlas` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasRequest {
    pub t_max: f64,
    pub tol: f64,
    pub starts: Vec<AtlasStart>,
}

/// Energy grid of a `wkb` run, relative to the barrier height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WkbRequest {
    pub e_min_over_v0: f64,
    pub e_max_over_v0: f64,
    pub n_energies: usize,
}

/// Where result files go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

/// The full run configuration. Sections beyond the potential are optional;
/// each subcommand checks for the ones it needs and reports which are
/// missing. The same document drives every subcommand, so one file can
/// describe a complete figure (correlation, transmission, atlas) at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Document format version; this binary understands version 1.
    pub schema_version: u32,
    pub hbar: f64,
    #[serde(default)]
    pub propagator: Propagator,
    pub potential: PotentialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packets: Option<PacketPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ehk: Option<EhkConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<TimeWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmission: Option<TransmissionRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atlas: Option<AtlasRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wkb: Option<WkbRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

impl RunConfig {
    pub fn packets(&self) -> Result<&PacketPair, CliError> {
        self.packets.as_ref().ok_or_else(|| {
            CliError::Config(
                "no [packets] section: correlation runs need packets.initial and packets.final"
                    .to_string(),
            )
        })
    }

    pub fn times(&self) -> Result<&TimeWindow, CliError> {
        self.times.as_ref().ok_or_else(|| {
            CliError::Config(
                "no [times] section: set times.t_max and times.n_samples".to_string(),
            )
        })
    }

    pub fn grid(&self) -> Result<&GridConfig, CliError> {
        self.grid.as_ref().ok_or_else(|| {
            CliError::Config(
                "no [grid] section: the grid propagator needs domain, size, and step".to_string(),
            )
        })
    }

    /// The sampling section, or its documented defaults when absent.
    pub fn sampling(&self) -> Sampling {
        self.sampling.unwrap_or_default()
    }

    /// The split-propagator knobs, or the default margin for this barrier.
    pub fn ehk(&self) -> EhkConfig {
        self.ehk
            .unwrap_or_else(|| EhkConfig::with_default_margin(self.potential.v0))
    }

    /// Dimensionless barrier scale m V0 l² / ħ²; semiclassical propagation
    /// degrades once this drops toward 1.
    pub fn barrier_scale(&self) -> f64 {
        MASS * self.potential.v0 * self.potential.l * self.potential.l / (self.hbar * self.hbar)
    }
}

/// Built-in configurations, compiled into the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Complex-orbit atlas on the algebraic barrier.
    Fig1,
    /// Static-barrier correlation, split propagator against the grid.
    Fig2a,
    /// Driven-barrier correlation.
    Fig2b,
    /// Transmission curves on the static barrier.
    Fig3,
}

impl Preset {
    pub fn text(self) -> &'static str {
        match self {
            Preset::Fig1 => include_str!("../presets/fig1.toml"),
            Preset::Fig2a => include_str!("../presets/fig2a.toml"),
            Preset::Fig2b => include_str!("../presets/fig2b.toml"),
            Preset::Fig3 => include_str!("../presets/fig3.toml"),
        }
    }
}

/// Command-line overrides applied onto the loaded document.
#[derive(Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// An effective configuration ready to run: overrides applied, content
/// hashed, output directory pinned.
#[derive(Debug)]
pub struct Resolved {
    pub config: RunConfig,
    /// Hex SHA-256 of the canonical serialization, excluding [output].
    pub hash: String,
    pub out_dir: PathBuf,
}

/// Parses a configuration document and applies overrides. The seed override
/// lands in the sampling section (materializing it at defaults first when
/// absent) and therefore changes the recorded hash; the output override does
/// not.
pub fn resolve(text: &str, origin: &str, overrides: &Overrides) -> anyhow::Result<Resolved> {
    let mut config: RunConfig =
        toml::from_str(text).with_context(|| format!("parsing {origin}"))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "{origin} has schema_version {}, this binary understands {}",
            config.schema_version, SCHEMA_VERSION
        ))
        .into());
    }
    config.potential.validate().context("checking [potential]")?;
    if !(config.hbar > 0.0 && config.hbar.is_finite()) {
        return Err(CliError::Config(format!(
            "hbar must be positive and finite, got {}",
            config.hbar
        ))
        .into());
    }
    if let Some(pair) = &config.packets {
        pair.initial.validate().context("checking packets.initial")?;
        pair.final_.validate().context("checking packets.final")?;
    }

    if let Some(seed) = overrides.seed {
        config.sampling.get_or_insert_with(Sampling::default).seed = seed;
    }
    if let Some(out) = &overrides.out {
        config.output = Some(OutputSection { dir: out.clone() });
    }
    let out_dir = match &config.output {
        Some(section) => section.dir.clone(),
        None => {
            return Err(CliError::Config(
                "no output directory: set [output] dir in the configuration or pass --out"
                    .to_string(),
            )
            .into())
        }
    };

    let hash = config_hash(&config)?;
    Ok(Resolved {
        config,
        hash,
        out_dir,
    })
}

/// Loads the document text for --config or --preset.
pub fn load_source(
    config: Option<&Path>,
    preset: Option<Preset>,
) -> anyhow::Result<(String, String)> {
    match (config, preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            Ok((text, path.display().to_string()))
        }
        (None, Some(preset)) => Ok((
            preset.text().to_string(),
            format!(
                "preset {}",
                preset.to_possible_value().expect("presets are not skipped").get_name()
            ),
        )),
        // clap's argument group enforces exactly one source.
        _ => unreachable!("argument parsing admits exactly one configuration source"),
    }
}

/// Hex SHA-256 of the configuration's canonical TOML form with the output
/// section cleared, so runs directed at different directories but computing
/// the same numbers share an identity.
pub fn config_hash(config: &RunConfig) -> anyhow::Result<String> {
    let mut physics = config.clone();
    physics.output = None;
    let canonical = toml::to_string(&physics).context("serializing configuration for hashing")?;
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        write!(hex, "{byte:02x}").expect("writing to a string cannot fail");
    }
    Ok(hex)
}
