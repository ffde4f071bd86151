use std::path::Path;
use std::process::ExitCode;

use emoflow_core::burst::BurstError;
use emoflow_core::emotion::EmotionError;
use emoflow_core::fit::FitError;
use emoflow_core::graph::GraphError;
use emoflow_core::sim::SimError;
use emoflow_core::synth::SynthError;
use thiserror::Error;

/// Command failures, bucketed by exit code: bad invocation or config (2),
/// filesystem trouble (3), and data that is structurally fine but outside
/// an operation's domain (4).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Io(_) => ExitCode::from(3),
            CliError::Domain(_) => ExitCode::from(4),
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Wraps a filesystem error with the path it concerns.
pub fn io_at(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Loader errors split by variant: the I/O wrappers keep exit code 3,
/// everything else is a problem with the data itself.
pub fn from_graph(path: &Path, e: GraphError) -> CliError {
    match e {
        GraphError::Io(e) => io_at(path, e),
        other => CliError::Domain(format!("{}: {other}", path.display())),
    }
}

pub fn from_emotion(path: &Path, e: EmotionError) -> CliError {
    match e {
        EmotionError::Io(e) => io_at(path, e),
        other => CliError::Domain(format!("{}: {other}", path.display())),
    }
}

pub fn from_burst(path: &Path, e: BurstError) -> CliError {
    match e {
        BurstError::Io(e) => io_at(path, e),
        other => CliError::Domain(format!("{}: {other}", path.display())),
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<EmotionError> for CliError {
    fn from(e: EmotionError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Domain(e.to_string())
    }
}

/// Synthetic-data specs come straight from flags/config, so a rejected
/// spec is an invocation problem, not a data problem.
impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Usage(e.to_string())
    }
}
