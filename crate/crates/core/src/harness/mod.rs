//! Experiment configuration, Monte-Carlo sweeps and result persistence.
//!
//! - [`config`]: JSON documents with unit-suffixed keys and their
//!   conversion into an [`ExperimentSpec`].
//! - [`experiment`]: parallel trials with a deterministic reduction.
//! - [`output`]: CSV writers for aggregate rows and convergence traces.
//! - [`oracle`]: exhaustive grid search on micro instances.

pub mod config;
pub mod experiment;
pub mod oracle;
pub mod output;

pub use config::{dump_config, load_config, parse_config, ConfigDocument, ConfigError, ExperimentSpec, SweepVariable};
pub use experiment::{run_experiment, ExperimentOutput, ResultRow, TrialRecord};
pub use output::{emit_csv, format_g, write_csv, write_trace};
