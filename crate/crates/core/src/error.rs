use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("components {0} and {1} are not disjoint (separation {2:.3e})")]
    NotDisjoint(usize, usize, f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ill-conditioned equilibrium system (condition estimate {0:.3e})")]
    IllConditioned(f64),

    #[error("insufficient resolution: validation residual {0:.3e} exceeds tolerance")]
    InsufficientResolution(f64),

    #[error("point {0} lies inside K (green value {1:.3e})")]
    InsideSet(String, f64),

    #[error("level exceeds s0 (s = {0}): {1}")]
    LevelExceedsS0(f64, String),

    #[error("level-curve corrector diverged at s = {0} near {1}")]
    CorrectorDiverged(f64, String),

    #[error("degree below n1: {0}")]
    DegreeBelowN1(String),

    #[error("refine trace: {0}")]
    RefineTrace(String),

    #[error("s = c/n = {s:.4} is not below s0/2 = {half_s0:.4}; reduce c or raise n")]
    LevelTooLarge { s: f64, half_s0: f64 },

    #[error("level s = {s:.3e} is within {factor}x the model residual {residual:.1e}; raise the panel count")]
    LevelBelowResolution { s: f64, residual: f64, factor: f64 },

    #[error("refine grid: {0}")]
    RefineGrid(String),

    #[error("degenerate sample set: {0}")]
    DegenerateSamples(String),

    #[error("geometry document: {0}")]
    Json(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
