use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarkovError {
    #[error(
        "drift {drift} at state {state} leaves the unit interval for transition probabilities"
    )]
    DriftOutOfRange { state: usize, drift: f64 },
    #[error("power iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    NotConverged { iterations: usize, last_change: f64 },
    #[error("degenerate chain: {0}")]
    Degenerate(String),
    #[error("state {state} outside 0..={n}")]
    StateOutOfRange { state: usize, n: usize },
    #[error("singular system: {0}")]
    Singular(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("{rows} rows leave no degrees of freedom for {free} free parameters")]
    NoDegreesOfFreedom { rows: usize, free: usize },
    #[error("model has no free parameters")]
    NothingToFit,
    #[error("invalid model setup: {0}")]
    Setup(String),
    #[error(
        "fit did not converge: {reason} (after {iterations} iterations, chi2 trace {trace:?})"
    )]
    NotConverged {
        reason: String,
        iterations: usize,
        trace: Vec<f64>,
    },
    #[error("stage {stage}: {source}")]
    Stage { stage: usize, source: Box<FitError> },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no estimate: all {replicates} replicates were censored at {max_steps} steps")]
    AllCensored { replicates: usize, max_steps: u64 },
}
