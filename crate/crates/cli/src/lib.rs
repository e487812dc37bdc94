//! Seeded experiment runner: each command builds instances, runs the
//! corresponding checks from `sunflower-core`, and returns a [`Report`].

pub mod config;
pub mod report;

mod clique;
mod codes;
mod families;
mod monotone;

use std::path::{Path, PathBuf};
use std::time::Instant;

use sunflower_core::probability::{stream_rng, StreamRng};
use thiserror::Error;

pub use config::{Command, ConfigError, EngineChoice, ExperimentConfig};
pub use report::{emit, CheckKind, CheckRow, Format, Report, Status};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] sunflower_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Runs one experiment. Everything but `wall_clock_ms` is a function of the
/// config alone.
pub fn run(config: &ExperimentConfig) -> Result<Report, RunError> {
    let start = Instant::now();
    let mut report = Report::new(config.clone());
    match config.command {
        Command::SunflowerExtract => families::sunflower_extract(config, &mut report)?,
        Command::Coverage => families::coverage(config, &mut report)?,
        Command::SpreadExperiment => families::spread_experiment(config, &mut report)?,
        Command::ClosureDemo => monotone::closure_demo(config, &mut report)?,
        Command::HrVerify => monotone::hr_verify(config, &mut report)?,
        Command::CliqueVerify => clique::clique_verify(config, &mut report)?,
        Command::CliqueExtract => clique::clique_extract(config, &mut report)?,
        Command::Janson => clique::janson(config, &mut report)?,
        Command::CodePoly => codes::code_poly(config, &mut report)?,
    }
    report.wall_clock_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Instance generation draws from streams far above those used by the
/// sampling engine, so the two never share randomness.
const INSTANCE_STREAM: u64 = 1 << 40;

pub(crate) fn instance_rng(config: &ExperimentConfig, index: u64) -> StreamRng {
    stream_rng(config.seed_or_zero(), INSTANCE_STREAM + index)
}

pub(crate) fn read_input(path: &str) -> Result<String, RunError> {
    std::fs::read_to_string(Path::new(path)).map_err(|source| RunError::Io {
        path: PathBuf::from(path),
        source,
    })
}

pub(crate) fn details<T: serde::Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("report details serialize")
}
