use std::path::{Path, PathBuf};

use anyhow::Result;

use mf_infer::inference::Schedule;

use crate::config::RunConfig;
use crate::experiment::{execute, RunOutput};
use crate::output::{self, SUMMARY_COLUMNS};

/// Paths written by [`cmd_run`].
#[derive(Debug, Clone)]
pub struct RunFiles {
    pub samples: PathBuf,
    pub summary: PathBuf,
    pub nu_trace: Option<PathBuf>,
    pub mean_function: Option<PathBuf>,
}

/// Runs `cfg` with its seed and writes the run files into `out`.
pub fn cmd_run(cfg: &RunConfig, out: &Path) -> Result<(RunOutput, RunFiles)> {
    let result = execute(cfg, cfg.seed, cfg.stop.condition()?, Schedule::default())?;
    let header = output::header(&cfg.hash(), cfg.seed);
    let files = RunFiles {
        samples: out.join("samples.jsonl"),
        summary: out.join("summary.csv"),
        nu_trace: result.mean_function.as_ref().map(|_| out.join("nu_trace.csv")),
        mean_function: result.mean_function.as_ref().map(|_| out.join("mean_function.txt")),
    };
    output::write_samples(&files.samples, &header, &result.rows)?;
    output::write_lines(
        &files.summary,
        &header,
        [SUMMARY_COLUMNS.to_string(), output::summary_line(&result.rows)?],
    )?;
    if let (Some(path), Some(f)) = (&files.mean_function, &result.mean_function) {
        output::write_mean_function(path, &header, f)?;
    }
    if let Some(path) = &files.nu_trace {
        output::write_trace(path, &header, &result.trace)?;
    }
    Ok((result, files))
}
