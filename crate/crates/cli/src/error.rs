use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config {path}:{line}: {message}")]
    Config { path: String, line: usize, message: String },
    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),
    #[error("io error on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("bad results file {path}: {message}")]
    Results { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] catbc_core::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    code: i32,
    message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config { path: String::new(), line: 0, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.into(), message: err.to_string() }
    }

    /// Stable machine-readable name.
    pub fn kind(&self) -> &'static str {
        use catbc_core::Error as E;
        match self {
            CliError::Config { .. } => "config",
            CliError::MissingArtifact(_) => "missing_artifact",
            CliError::Io { .. } => "io",
            CliError::Results { .. } => "results",
            CliError::Core(e) => match e {
                E::SizeMismatch(..) => "size_mismatch",
                E::DegenerateInput(_) => "degenerate_input",
                E::EmptyCloud => "empty_cloud",
                E::DegenerateExtent { .. } => "degenerate_extent",
                E::InvalidDistribution { .. } => "invalid_distribution",
                E::EmptyDatabase => "empty_database",
                E::EmptyScene => "empty_scene",
                E::MissingAnchorImage(_) => "missing_anchor_image",
                E::EmptyTrajectory => "empty_trajectory",
                E::InvalidTrajectory(_) => "invalid_trajectory",
                E::FrameChain(_) => "frame_chain",
                E::NoFeasibleSubgoal => "no_feasible_subgoal",
                E::PathBlocked(_) => "path_blocked",
                E::InvalidGeometry(_) => "invalid_geometry",
                E::OutOfFrustum => "out_of_frustum",
                E::FractionOutOfRange(_) => "fraction_out_of_range",
                E::Parse(_) => "parse",
                E::Io(_) => "core_io",
            },
        }
    }

    /// Process exit code; distinct per failure kind. 2 is left to argument parsing.
    pub fn exit_code(&self) -> i32 {
        use catbc_core::Error as E;
        match self {
            CliError::Config { .. } => 3,
            CliError::MissingArtifact(_) => 4,
            CliError::Io { .. } => 5,
            CliError::Results { .. } => 6,
            CliError::Core(e) => match e {
                E::SizeMismatch(..) => 10,
                E::DegenerateInput(_) => 11,
                E::EmptyCloud => 12,
                E::DegenerateExtent { .. } => 13,
                E::InvalidDistribution { .. } => 14,
                E::EmptyDatabase => 15,
                E::EmptyScene => 16,
                E::MissingAnchorImage(_) => 17,
                E::EmptyTrajectory => 18,
                E::InvalidTrajectory(_) => 19,
                E::FrameChain(_) => 20,
                E::NoFeasibleSubgoal => 21,
                E::PathBlocked(_) => 22,
                E::InvalidGeometry(_) => 23,
                E::OutOfFrustum => 24,
                E::FractionOutOfRange(_) => 25,
                E::Parse(_) => 26,
                E::Io(_) => 27,
            },
        }
    }

    pub fn to_json(&self) -> String {
        let body = ErrorJson { error: self.kind(), code: self.exit_code(), message: self.to_string() };
        serde_json::to_string(&body).expect("plain struct serializes")
    }
}
