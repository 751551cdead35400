use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsmError {
    #[error("robot {robot} has no candidate trajectories")]
    EmptyGroup { robot: usize },

    #[error("trajectory (robot {robot}, traj {traj}) is already in the selection")]
    AlreadySelected { robot: usize, traj: usize },

    #[error("duplicate trajectory (robot {robot}, traj {traj}) in ground set")]
    DuplicateTrajectory { robot: usize, traj: usize },

    #[error("trajectory (robot {robot}, traj {traj}) is filed under group {group}")]
    MisfiledTrajectory {
        robot: usize,
        traj: usize,
        group: usize,
    },

    #[error("endpoint of (robot {robot}, traj {traj}) lies {distance:.6} m from center, outside reach {reach:.6} m")]
    OutOfReach {
        robot: usize,
        traj: usize,
        distance: f64,
        reach: f64,
    },

    #[error("instance too large: {size} combinations exceeds limit {limit}")]
    InstanceTooLarge { size: f64, limit: f64 },

    #[error("invalid discretization: {0}")]
    InvalidStep(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid deviation problem: {0}")]
    InvalidProblem(String),

    #[error("communication graph at the start of the epoch is disconnected")]
    Disconnected,

    #[error("epoch {epoch} produced no feasible plan")]
    InfeasibleEpoch { epoch: usize },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("nothing to summarize")]
    EmptyInput,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CsmError {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        CsmError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = CsmError> = std::result::Result<T, E>;
