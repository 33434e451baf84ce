//! Benchmark harness around `lacnav-core`: experiment configs, streamed
//! trace files, results, comparison tables, SVG plots and the `lacnav` CLI.

pub mod cli;
pub mod compare;
pub mod config;
pub mod exec;
pub mod plot;
pub mod results;
pub mod runner;
pub mod trace;
pub mod verify;

pub use config::ExperimentConfig;
pub use exec::Parallel;
