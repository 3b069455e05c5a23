//! Experiment driver behind the `conflict-min` binary.
//!
//! [`run::run`] loads a graph, draws or reads internal opinions, runs one
//! selection method and evaluates the exact drop of the conflict measure.
//! [`run::sweep`] repeats that for every budget `1..=K`.

pub mod config;
pub mod error;
pub mod opinions;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, OpinionSource};
pub use error::CliError;
pub use opinions::{generate_opinions, Distribution, Normalization};
pub use report::{relative_error, RunReport, SweepRow};
pub use run::{run, sweep};
