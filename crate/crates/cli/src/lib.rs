//! Batch front end for the qss simulator: load a config, run one named
//! experiment, write its result table.

pub mod config;
pub mod experiments;
pub mod output;

use std::fs::{self, File};
use std::io::BufWriter;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

pub use config::{parse, validate, Experiment, ExperimentConfig, OutputFormat, ValidationReport, EXPERIMENTS};
pub use experiments::{execute, Outcome};
use qss::{Exec, QssError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Invalid(config::Violation),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Compute(#[from] QssError),
    #[error("thread pool: {0}")]
    Threads(String),
}

/// Names and one-line descriptions of every experiment.
pub fn list_experiments() -> Vec<(&'static str, &'static str)> {
    EXPERIMENTS.to_vec()
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output.path`.
    pub out_dir: Option<PathBuf>,
    /// `None` uses every available core.
    pub threads: Option<NonZeroUsize>,
    /// Overrides the config seed.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub table_path: PathBuf,
    pub summary_path: Option<PathBuf>,
    pub outcome: Outcome,
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.into(),
        source,
    })?;
    let (cfg, report) = parse(&text);
    match cfg {
        Some(cfg) => Ok(cfg),
        None => Err(CliError::Invalid(report.violations[0].clone())),
    }
}

/// Runs `cfg` on the requested number of threads.
pub fn execute_with_threads(cfg: &ExperimentConfig, threads: Option<NonZeroUsize>) -> Result<Outcome, CliError> {
    if threads.is_some_and(|n| n.get() == 1) || !cfg!(feature = "parallel") {
        return Ok(execute(cfg, Exec::Sequential)?);
    }
    parallel(cfg, threads)
}

#[cfg(feature = "parallel")]
fn parallel(cfg: &ExperimentConfig, threads: Option<NonZeroUsize>) -> Result<Outcome, CliError> {
    let Some(n) = threads else {
        return Ok(execute(cfg, Exec::Parallel)?);
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n.get())
        .build()
        .map_err(|e| CliError::Threads(e.to_string()))?;
    Ok(pool.install(|| execute(cfg, Exec::Parallel))?)
}

#[cfg(not(feature = "parallel"))]
fn parallel(cfg: &ExperimentConfig, _threads: Option<NonZeroUsize>) -> Result<Outcome, CliError> {
    Ok(execute(cfg, Exec::Sequential)?)
}

/// Runs the experiment and writes `<name>.csv` (or `.jsonl`) plus
/// `<name>.summary.json` when the experiment has a summary.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    let dir = opts.out_dir.clone().unwrap_or_else(|| cfg.output.path.clone());
    fs::create_dir_all(&dir).map_err(|source| CliError::Write {
        path: dir.clone(),
        source,
    })?;
    let name = cfg.experiment.name();
    let table_path = dir.join(format!("{name}.{}", cfg.output.format.extension()));
    // Fail on an unwritable path before spending time on the computation.
    let file = File::create(&table_path).map_err(|source| CliError::Write {
        path: table_path.clone(),
        source,
    })?;

    let outcome = execute_with_threads(&cfg, opts.threads)?;

    let write_err = |source| CliError::Write {
        path: table_path.clone(),
        source,
    };
    let out = BufWriter::new(file);
    match cfg.output.format {
        OutputFormat::Csv => output::write_csv(&outcome.table, out).map_err(|e| write_err(e.into()))?,
        OutputFormat::Jsonl => output::write_jsonl(&outcome.table, out).map_err(write_err)?,
    }
    let summary_path = match &outcome.summary {
        None => None,
        Some(s) => {
            let path = dir.join(format!("{name}.summary.json"));
            fs::write(&path, format!("{s}\n")).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            Some(path)
        }
    };
    Ok(RunReport {
        table_path,
        summary_path,
        outcome,
    })
}
