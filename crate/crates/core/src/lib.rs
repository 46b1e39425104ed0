//! Simulation and analysis of swarm performance curves and urn models of
//! collective decisions with tunable positive feedback.
//!
//! Replicate-level work (ensembles, histograms, switching times, scenario
//! batches) runs on rayon when the default `parallel` feature is enabled;
//! every entry point also accepts [`Execution::Sequential`] and produces
//! identical output either way.

pub mod error;
pub mod estimation;
pub mod exec;
pub mod fitting;
pub mod io;
pub mod markov;
pub mod model;
pub mod scenario;
pub mod urn;

pub use error::{FitError, MarkovError, ModelError, SimError};
pub use exec::Execution;
pub use model::{DriftSpec, FeedbackProfile, PayoffProfile, PerformanceParams};
