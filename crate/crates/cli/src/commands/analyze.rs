//! Performance report from a sample log.

use anyhow::{anyhow, bail, Context, Result};

use mf_infer::inference::{report, EstimatorReport, LogMode, LogRow, MLaw};
use mf_infer::perf::{empirical_perf, EmpiricalPerf};
use mf_infer::schedule::NuTracePoint;

use crate::output::data_lines;

pub fn parse_log(text: &str) -> Result<Vec<LogRow>> {
    let rows = data_lines(text)
        .map(|(n, line)| serde_json::from_str::<LogRow>(line).map_err(|e| anyhow!("line {n}: {e}")))
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        bail!("sample log is empty");
    }
    Ok(rows)
}

/// Reads `i,k,nu_k` rows back into trace points.
pub fn parse_trace(text: &str) -> Result<Vec<NuTracePoint>> {
    let mut out: Vec<NuTracePoint> = Vec::new();
    for (n, line) in data_lines(text) {
        if line == "i,k,nu_k" {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            bail!("line {n}: expected 3 fields, found {}", f.len());
        }
        let i: u64 = f[0].parse().with_context(|| format!("line {n}: bad iteration"))?;
        let k: usize = f[1].parse().with_context(|| format!("line {n}: bad cell"))?;
        let nu: f64 = f[2].parse().with_context(|| format!("line {n}: bad rate"))?;
        match out.last_mut() {
            Some(p) if p.i == i && p.nu.len() + 1 == k => p.nu.push(nu),
            _ if k == 1 => out.push(NuTracePoint { i, nu: vec![nu] }),
            _ => bail!("line {n}: cell {k} out of sequence"),
        }
    }
    Ok(out)
}

/// `poisson`, `geometric` or `binomial:MAX`.
pub fn parse_law(s: &str) -> Result<MLaw> {
    match s {
        "poisson" => Ok(MLaw::Poisson),
        "geometric" => Ok(MLaw::Geometric),
        _ => {
            let max = s
                .strip_prefix("binomial:")
                .ok_or_else(|| anyhow!("unknown law `{s}` (poisson, geometric, binomial:MAX)"))?;
            let max: u64 = max.parse().with_context(|| format!("bad binomial maximum `{max}`"))?;
            if max == 0 {
                bail!("binomial maximum must be positive");
            }
            Ok(MLaw::Binomial { max })
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub mode: LogMode,
    pub report: EstimatorReport,
    pub perf: EmpiricalPerf,
    /// Final ν of the trace, when one was supplied.
    pub nu_tail: Option<Vec<f64>>,
}

pub fn analyze(rows: &[LogRow], law: MLaw, trace: Option<&[NuTracePoint]>) -> Result<Analysis> {
    let mode = rows[0].mode;
    if rows.iter().any(|r| r.mode != mode) {
        bail!("log mixes single- and multifidelity rows");
    }
    Ok(Analysis {
        mode,
        report: report(rows)?,
        perf: empirical_perf(rows, &law)?,
        nu_tail: trace.and_then(|t| t.last()).map(|p| p.nu.clone()),
    })
}

impl Analysis {
    /// `metric,value` lines.
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec!["metric,value".to_string()];
        let mut put = |k: &str, v: String| out.push(format!("{k},{v}"));
        let r = &self.report;
        put("mode", format!("{:?}", self.mode).to_lowercase());
        put("n", r.n.to_string());
        put("g_hat", format!("{:?}", r.g_hat));
        put("mse_hat", format!("{:?}", r.variance_estimate));
        put("j_hat", format!("{:?}", r.j_coefficient));
        put("total_cost", format!("{:?}", r.total_cost));
        put("j_hi_hat", format!("{:?}", self.perf.j_hi_hat));
        if self.mode == LogMode::Multi {
            put("j_mf_hat", format!("{:?}", self.perf.j_mf_hat));
            put("lhs_margin", format!("{:?}", self.perf.lhs_margin));
            put("predicate", self.perf.predicate.to_string());
        }
        if let Some(nu) = &self.nu_tail {
            for (k, v) in nu.iter().enumerate() {
                put(&format!("nu_{}", k + 1), format!("{v:?}"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_malformed_logs() {
        assert!(parse_log("").is_err());
        assert!(parse_log("# header only\n").is_err());
        let err = parse_log("# h\n{\"i\":0}\n").unwrap_err().to_string();
        assert!(err.starts_with("line 2:"), "{err}");
    }

    #[test]
    fn laws() {
        assert_eq!(parse_law("binomial:4").unwrap(), MLaw::Binomial { max: 4 });
        assert_eq!(parse_law("geometric").unwrap(), MLaw::Geometric);
        assert!(parse_law("binomial:0").is_err());
        assert!(parse_law("normal").is_err());
    }

    #[test]
    fn trace_round_trip() {
        let t = parse_trace("# h\ni,k,nu_k\n0,1,1.0\n0,2,1.0\n5,1,0.5\n5,2,2.0\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[1].nu, vec![0.5, 2.0]);
        assert!(parse_trace("0,2,1.0\n").is_err());
    }
}
