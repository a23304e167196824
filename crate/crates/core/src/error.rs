use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cutoff {found} does not match expected cutoff {expected}")]
    CutoffMismatch { expected: usize, found: usize },

    #[error("cutoff must be at least 2, got {0}")]
    CutoffTooSmall(usize),

    #[error(
        "truncation deficit {deficit:.3e} exceeds tolerance {tolerance:.1e}; \
         use a cutoff of at least {required_cutoff}"
    )]
    Truncation {
        deficit: f64,
        tolerance: f64,
        required_cutoff: usize,
    },

    #[error("top-level population {leakage:.3e} exceeds bound {bound:.1e}; increase the cutoff")]
    Leakage { leakage: f64, bound: f64 },

    #[error("state is not normalized (norm squared {0})")]
    NotNormalized(f64),

    #[error("cannot normalize the zero vector")]
    ZeroVector,

    #[error("trace drift {drift:.3e} in one step exceeds {limit:.1e}; reduce dt")]
    TraceDrift { drift: f64, limit: f64 },

    #[error("density matrix has eigenvalue {0:.3e} below the positivity floor")]
    NotPositive(f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trajectory aborted in period {period}: {cause}")]
    TrajectoryAborted { period: usize, cause: Box<Error> },

    #[error("checkpoint grids differ between records")]
    CheckpointMismatch,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
