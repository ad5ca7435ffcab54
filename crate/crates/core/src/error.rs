use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("excess demand {x} outside operating range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("invalid operating range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("price function is not strictly increasing: g'({x}) = {slope}")]
    NotIncreasing { x: f64, slope: f64 },
    #[error("polynomial coefficients must be non-empty and finite")]
    BadCoefficients,
    #[error("bad price table: {0}")]
    BadTable(String),
    #[error("bad noise model: {0}")]
    BadNoise(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),
    #[error("excess demand left the price function's operating range at t={t} (A={a}, eta={eta}): {source}")]
    OutOfRange { t: u64, a: f64, eta: f64, source: MarketError },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("the post-warmup window is empty")]
    EmptyWindow,
    #[error("observable requires S = 2, run used S = {0}")]
    WrongS(usize),
    #[error("{} signals visited fewer than {min} times after warmup (first: {:?})", starved.len(), &starved[..starved.len().min(8)])]
    InsufficientCoverage { min: u64, starved: Vec<usize> },
    #[error("the run kept only accumulators, not the per-step series")]
    SeriesDiscarded,
    #[error("need at least two complete batches for standard errors, have {0}")]
    TooFewBatches(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CavityError {
    #[error("reaction term R_x = {0} is not negative")]
    DegenerateReaction(f64),
    #[error("cavity field variance q_g = {0} is not positive")]
    DegenerateField(f64),
    #[error("could not bracket the root of the mean-price equation at z = {0}")]
    RangeExhausted(f64),
    #[error("no bracket for the bias equation")]
    NoBracket,
    #[error("fixed point not converged after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("replica-symmetric solution breaks down at alpha = {alpha}: alpha - (1 - phi) = {margin:e}")]
    ReplicaSymmetryBroken { alpha: f64, margin: f64 },
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("trajectory analysis requires S = 2, got S = {0}")]
    WrongS(usize),
    #[error("need at least {need} (agent, seed) trajectories, have {have}")]
    InsufficientEnsemble { need: usize, have: usize },
    #[error("window [{lo}, {hi}] holds {points} recorded times, need at least {need}")]
    SparseWindow { lo: u64, hi: u64, points: usize, need: usize },
    #[error("bad recording schedule: {0}")]
    BadSchedule(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}
