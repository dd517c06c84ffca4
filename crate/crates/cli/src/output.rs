//! Output files. Each starts with a `#` header naming the tool version,
//! config hash and seed.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use mf_infer::inference::{report, LogRow};
use mf_infer::schedule::{MeanFunction, NuTracePoint};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn header(config_hash: &str, seed: u64) -> String {
    format!("# mf-infer {VERSION} config={config_hash} seed={seed}")
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Writes `lines` after the header line.
pub fn write_lines<I, S>(path: &Path, header: &str, lines: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut w = create(path)?;
    writeln!(w, "{header}")?;
    for line in lines {
        writeln!(w, "{}", line.as_ref())?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_samples(path: &Path, header: &str, rows: &[LogRow]) -> Result<()> {
    let lines = rows
        .iter()
        .map(|r| serde_json::to_string(r).expect("rows serialise"));
    write_lines(path, header, lines)
}

/// `n,g_hat,mse_hat,j_hat,total_cost`; the error columns are empty below two samples.
pub fn summary_line(rows: &[LogRow]) -> Result<String> {
    let r = report(rows)?;
    let opt = |x: f64| if x.is_finite() { format!("{x:?}") } else { String::new() };
    Ok(format!(
        "{},{:?},{},{},{:?}",
        r.n,
        r.g_hat,
        opt(r.variance_estimate),
        opt(r.j_coefficient),
        r.total_cost
    ))
}

pub const SUMMARY_COLUMNS: &str = "n,g_hat,mse_hat,j_hat,total_cost";

pub fn write_trace(path: &Path, header: &str, trace: &[NuTracePoint]) -> Result<()> {
    let mut lines = vec!["i,k,nu_k".to_string()];
    for p in trace {
        for (k, nu) in p.nu.iter().enumerate() {
            lines.push(format!("{},{},{:?}", p.i, k + 1, nu));
        }
    }
    write_lines(path, header, lines)
}

pub fn write_mean_function(path: &Path, header: &str, f: &MeanFunction) -> Result<()> {
    write_lines(path, header, [f.render().trim_end()])
}

/// Lines of `text` that are neither blank nor `#` comments, with 1-based numbers.
pub fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}
