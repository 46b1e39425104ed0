use std::path::Path;

use swarmcalc::io::IoError;
use swarmcalc::{FitError, MarkovError, ModelError, SimError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }

    /// Parse errors of a file name the file.
    pub fn from_csv(path: &Path, e: IoError) -> Self {
        match e {
            IoError::Io(e) => CliError::Io(format!("{}: {e}", path.display())),
            IoError::Empty => {
                CliError::Input(format!("{}: empty CSV, no data rows", path.display()))
            }
            e @ IoError::Malformed { .. } => CliError::Input(format!("{}: {e}", path.display())),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::AllCensored { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<MarkovError> for CliError {
    fn from(e: MarkovError) -> Self {
        match e {
            MarkovError::NotConverged { .. } | MarkovError::Singular(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        let inner = match &e {
            FitError::Stage { source, .. } => source.as_ref(),
            other => other,
        };
        match inner {
            FitError::Setup(_) | FitError::NothingToFit | FitError::NoDegreesOfFreedom { .. } => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Numerical(summarize_fit_failure(&e)),
        }
    }
}

/// The failure reason and the first and last few chi-square values.
pub fn summarize_fit_failure(e: &FitError) -> String {
    match e {
        FitError::NotConverged {
            reason,
            iterations,
            trace,
        } => {
            let shown: Vec<String> = if trace.len() <= 6 {
                trace.iter().map(|c| format!("{c:.6e}")).collect()
            } else {
                let head = trace[..3].iter().map(|c| format!("{c:.6e}"));
                let tail = trace[trace.len() - 3..].iter().map(|c| format!("{c:.6e}"));
                head.chain(std::iter::once("...".to_string()))
                    .chain(tail)
                    .collect()
            };
            format!(
                "fit did not converge: {reason}; {iterations} iterations; chi2 trace [{}]",
                shown.join(", ")
            )
        }
        FitError::Stage { stage, source } => {
            format!("stage {stage}: {}", summarize_fit_failure(source))
        }
        other => other.to_string(),
    }
}
