//! Experiment driver: config files, subcommands, and their artifacts.

mod config;
mod run;

pub use config::{fmt_f64, DtSpec, ExperimentConfig};
pub use run::{
    configure_threads, error_line, execute, run_subcommand, version, RunOutcome, Subcommand,
    SUBCOMMAND_NAMES,
};
