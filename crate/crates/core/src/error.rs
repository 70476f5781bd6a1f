use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("degenerate extent on axis {axis}: {extent:e} m")]
    DegenerateExtent { axis: usize, extent: f64 },
    #[error("invalid distribution at point {point}, axis {axis}: sums to {sum}")]
    InvalidDistribution { point: usize, axis: usize, sum: f64 },
    #[error("template database is empty")]
    EmptyDatabase,
    #[error("sdf scene has no primitives")]
    EmptyScene,
    #[error("demo anchor {0} has no correspondent")]
    MissingAnchorImage(usize),
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("frame chain error: {0}")]
    FrameChain(String),
    #[error("no feasible symmetric subgoal")]
    NoFeasibleSubgoal,
    #[error("transport path blocked up to lift height {0} m")]
    PathBlocked(f64),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("object is outside the camera frustum")]
    OutOfFrustum,
    #[error("dropout fraction {0} outside [0, 0.4]")]
    FractionOutOfRange(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
