use crate::geometry::LatticePoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("path endpoints do not match: {left} != {right}")]
    EndpointMismatch { left: LatticePoint, right: LatticePoint },

    #[error("vertices {index} and {next} of the path are not lattice neighbors")]
    NotAPath { index: usize, next: usize },

    #[error("lattice coordinate overflow")]
    CoordinateOverflow,

    #[error("vertex {0} is not in the tree")]
    VertexAbsent(LatticePoint),

    #[error("graph is not connected")]
    Disconnected,

    #[error("terminal sets intersect")]
    TerminalsOverlap,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error(
        "intrinsic ball of radius {radius} around {center} reaches the unexplored part of the tree; increase the window"
    )]
    ClippedBall { center: LatticePoint, radius: u64 },

    #[error("step cap of {cap} reached before the walk stopped")]
    StepCapReached { cap: u64 },

    #[error("path between {0} and {1} runs through the wired boundary")]
    ThroughBoundary(LatticePoint, LatticePoint),

    #[error("probability mass drifted by {drift:e} after {steps} steps")]
    NormalizationDrift { drift: f64, steps: u64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
