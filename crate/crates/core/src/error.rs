use thiserror::Error;

/// Errors surfaced by the game, learner, environment, and chain layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("action space invalid: {0}")]
    InvalidActionSpace(String),

    #[error("constraint graph of player {player} is disconnected")]
    DisconnectedConstraints { player: usize },

    #[error("{what} requires {size} states, guard allows at most {limit}")]
    SizeGuard {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("round index must be at least 1 for the exploration schedule")]
    ZeroRound,

    #[error("kappa interval undefined: max constraint-set size {c} must exceed 2")]
    DegenerateKappa { c: usize },

    #[error("parameter out of range: {0}")]
    BadParameter(String),

    #[error("game has no global objective attached")]
    NoObjective,

    #[error("no upper bound available for the global objective of this game")]
    NoObjectiveBound,

    #[error("sensor {sensor} is missing the round message from neighbor {neighbor}")]
    MissingMessage { sensor: usize, neighbor: usize },

    #[error("sensor {sensor} received {count} messages from neighbor {neighbor}")]
    DuplicateMessage {
        sensor: usize,
        neighbor: usize,
        count: usize,
    },

    #[error("polygon construction failed: {0}")]
    BadPolygon(String),

    #[error("entropy of an empty pixel set is undefined")]
    EmptyPixelSet,

    #[error("reward inputs must be non-negative (got info {info}, qual {qual})")]
    NegativeReward { info: f64, qual: f64 },

    #[error("no stored sample image for sensor {sensor} action {action}")]
    MissingSampleImage { sensor: usize, action: usize },

    #[error("state pair is not a single-deviation edge: {0}")]
    NotSingleDeviation(String),

    #[error("chain state outside the admissible pair space: {0}")]
    BadChainState(String),

    #[error(
        "stationary solve did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("scenario configuration invalid:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("run log malformed: {0}")]
    BadRunLog(String),

    #[error("replay mismatch at round {round}: logged {logged}, recomputed {recomputed}")]
    ReplayMismatch {
        round: u64,
        logged: String,
        recomputed: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
