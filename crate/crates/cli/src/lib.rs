//! Library side of `wgcli`: configuration, runs and output writers.

pub mod config;
pub mod output;
pub mod run;

pub use config::{Format, RunConfig, SweepParameter};
pub use run::{
    run_existence, run_oracle_compare, run_spectrum, run_sweep, run_wavefunction, ComparisonRow, NamedSweep,
    SpectrumRow, SweepResult, WavefunctionExport,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure in {context}: {source}")]
    Numerical { context: String, source: robinwave::Error },
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn numerical(context: impl Into<String>) -> impl FnOnce(robinwave::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Numerical { context, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}
