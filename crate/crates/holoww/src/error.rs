use thiserror::Error;

/// Every failure the simulator can report. The harness maps these onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("chord-arc violation: min |1+W_alpha| = {min:.6e} below floor {floor}")]
    ChordArcViolation { min: f64, floor: f64 },
    #[error("non-finite value detected at t = {time}")]
    NaNDetected { time: f64 },
    #[error("infeasible data: {0}")]
    InfeasibleData(String),
    #[error("packet outside admissible region: {0}")]
    DomainOverflow(String),
    #[error("profile unstable: {0}")]
    ProfileUnstable(String),
    #[error("config refused: {0}")]
    ConfigRefused(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{stage}: {source}")]
    Io {
        stage: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(stage: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { stage: stage.into(), source }
    }

    /// True for failures that mean the flow itself broke down.
    pub fn is_breakdown(&self) -> bool {
        matches!(self, Error::ChordArcViolation { .. } | Error::NaNDetected { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
