//! Errors raised by the command layer itself. Numerical failures arrive as
//! [`ehk_core::CoreError`] and keep their own variants; everything is folded
//! into one machine-readable record on exit.

use ehk_core::CoreError;
use thiserror::Error;

/// Failures of configuration resolution and output management.
#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration file is missing a section or holds an unusable value.
    #[error("{0}")]
    Config(String),

    /// The output directory already holds results computed from a different
    /// configuration.
    #[error(
        "output directory {dir} holds results for configuration {found}, \
         not {want}; pass --force to replace them"
    )]
    OutputConflict {
        dir: String,
        found: String,
        want: String,
    },
}

/// The JSON document printed to stderr when a command fails.
#[derive(serde::Serialize)]
pub struct ErrorRecord {
    pub error: ErrorBody,
}

#[derive(serde::Serialize)]
pub struct ErrorBody {
    /// Stable machine-matchable tag, for example "band_exceeded" or "config".
    pub kind: &'static str,
    /// Human-readable description including any wrapping context.
    pub message: String,
}

/// Classifies an error chain into the record's `kind` tag: core numerical
/// errors map to the snake-case name of their variant, command-layer errors
/// to "config" or "output_conflict", I/O to "io", and anything else to "run".
pub fn error_record(err: &anyhow::Error) -> ErrorRecord {
    let kind = err
        .chain()
        .find_map(|cause| {
            if let Some(core) = cause.downcast_ref::<CoreError>() {
                return Some(core_kind(core));
            }
            if let Some(cli) = cause.downcast_ref::<CliError>() {
                return Some(match cli {
                    CliError::Config(_) => "config",
                    CliError::OutputConflict { .. } => "output_conflict",
                });
            }
            if cause.downcast_ref::<toml::de::Error>().is_some() {
                return Some("config");
            }
            if cause.downcast_ref::<std::io::Error>().is_some() {
                return Some("io");
            }
            None
        })
        .unwrap_or("run");
    ErrorRecord {
        error: ErrorBody {
            kind,
            message: format!("{err:#}"),
        },
    }
}

fn core_kind(err: &CoreError) -> &'static str {
    match err {
        CoreError::PoleProximity { .. } => "pole_proximity",
        CoreError::NoTurningPoint { .. } => "no_turning_point",
        CoreError::NonBracketable { .. } => "non_bracketable",
        CoreError::StepFailure { .. } => "step_failure",
        CoreError::MixedSegment { .. } => "mixed_segment",
        CoreError::BranchLoss { .. } => "branch_loss",
        CoreError::JumpBudgetExceeded { .. } => "jump_budget_exceeded",
        CoreError::EdgeContamination { .. } => "edge_contamination",
        CoreError::GridCoverage { .. } => "grid_coverage",
        CoreError::BandExceeded { .. } => "band_exceeded",
        CoreError::InsufficientDecay { .. } => "insufficient_decay",
        CoreError::TooManyAborts { .. } => "too_many_aborts",
        CoreError::InvalidParameter { .. } => "invalid_parameter",
    }
}
