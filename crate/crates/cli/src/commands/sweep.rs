//! Replicated runs over a list of cost budgets.

use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use mf_infer::inference::{report, Schedule, StopCondition};
use mf_infer::rng::derive_seed;

use crate::config::RunConfig;
use crate::experiment::execute;
use crate::output;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub budget: f64,
    pub replicate: usize,
    pub n: usize,
    pub g_hat: f64,
    pub mse_hat: f64,
    pub cost: f64,
}

/// Per-budget aggregates: the variance of `g_hat` across replicates and the
/// mean plug-in error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetSummary {
    pub budget: f64,
    pub mean_cost: f64,
    pub mean_g_hat: f64,
    pub across_variance: f64,
    pub mean_mse_hat: f64,
}

/// Least-squares line `log var = intercept + slope · log cost`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub budgets: Vec<BudgetSummary>,
    /// Both fits are absent with a single budget.
    pub fit_plugin: Option<SlopeFit>,
    pub fit_across: Option<SlopeFit>,
}

pub fn parse_budgets(list: &str) -> Result<Vec<f64>> {
    let budgets = list
        .split(',')
        .map(|s| {
            let b: f64 = s.trim().parse().with_context(|| format!("bad budget `{}`", s.trim()))?;
            if !(b > 0.0 && b.is_finite()) {
                bail!("budgets must be positive, got {b}");
            }
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    if budgets.is_empty() {
        bail!("empty budget list");
    }
    Ok(budgets)
}

pub fn fit_loglog(points: &[(f64, f64)]) -> Option<SlopeFit> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some(SlopeFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Runs `replicates` independent copies of `cfg` at each budget. Replicate
/// `r` at budget index `b` uses seed `derive_seed(seed, b, r)`; rows come out
/// ordered by budget then replicate whatever the completion order.
pub fn sweep(cfg: &RunConfig, seed: u64, budgets: &[f64], replicates: usize) -> Result<Sweep> {
    if replicates < 2 {
        bail!("a sweep needs at least 2 replicates");
    }
    let jobs: Vec<(usize, usize)> = (0..budgets.len())
        .flat_map(|b| (0..replicates).map(move |r| (b, r)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(b, r)| {
            let budget = budgets[b];
            let run_seed = derive_seed(seed, b as u64, r as u64);
            let out = execute(cfg, run_seed, StopCondition::CostBudget(budget), Schedule::Serial)
                .with_context(|| format!("budget {budget}, replicate {r}"))?;
            let rep = report(&out.rows).with_context(|| format!("budget {budget}, replicate {r}"))?;
            if !rep.variance_estimate.is_finite() {
                bail!("budget {budget} allows fewer than two samples");
            }
            Ok(SweepRow {
                budget,
                replicate: r,
                n: rep.n,
                g_hat: rep.g_hat,
                mse_hat: rep.variance_estimate,
                cost: rep.total_cost,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let summaries: Vec<BudgetSummary> = budgets
        .iter()
        .enumerate()
        .map(|(b, &budget)| {
            let group = &rows[b * replicates..(b + 1) * replicates];
            let k = group.len() as f64;
            let mean_g = group.iter().map(|r| r.g_hat).sum::<f64>() / k;
            BudgetSummary {
                budget,
                mean_cost: group.iter().map(|r| r.cost).sum::<f64>() / k,
                mean_g_hat: mean_g,
                across_variance: group.iter().map(|r| (r.g_hat - mean_g).powi(2)).sum::<f64>() / (k - 1.0),
                mean_mse_hat: group.iter().map(|r| r.mse_hat).sum::<f64>() / k,
            }
        })
        .collect();
    let fit = |f: fn(&BudgetSummary) -> f64| {
        let pts: Vec<(f64, f64)> = summaries.iter().map(|s| (s.mean_cost, f(s))).collect();
        fit_loglog(&pts)
    };
    Ok(Sweep {
        fit_plugin: fit(|s| s.mean_mse_hat),
        fit_across: fit(|s| s.across_variance),
        rows,
        budgets: summaries,
    })
}

/// Writes `sweep.csv` (one row per run) and `sweep_summary.csv` (one row per
/// budget, followed by the fitted slopes as comment lines).
pub fn write_sweep(out: &Path, header: &str, sweep: &Sweep) -> Result<()> {
    let mut lines = vec!["budget,replicate,n,g_hat,mse_hat,cost".to_string()];
    lines.extend(sweep.rows.iter().map(|r| {
        format!(
            "{:?},{},{},{:?},{:?},{:?}",
            r.budget, r.replicate, r.n, r.g_hat, r.mse_hat, r.cost
        )
    }));
    output::write_lines(&out.join("sweep.csv"), header, lines)?;

    let mut lines = vec!["budget,mean_cost,mean_g_hat,across_variance,mean_mse_hat".to_string()];
    lines.extend(sweep.budgets.iter().map(|s| {
        format!(
            "{:?},{:?},{:?},{:?},{:?}",
            s.budget, s.mean_cost, s.mean_g_hat, s.across_variance, s.mean_mse_hat
        )
    }));
    for (name, fit) in [("mean_mse_hat", sweep.fit_plugin), ("across_variance", sweep.fit_across)] {
        if let Some(f) = fit {
            lines.push(format!("# slope {name} {:?} intercept {:?}", f.slope, f.intercept));
        }
    }
    output::write_lines(&out.join("sweep_summary.csv"), header, lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loglog_fit_recovers_a_power_law() {
        let pts: Vec<(f64, f64)> = [1e3f64, 2e3, 4e3].iter().map(|&c| (c, 7.0 * c.powf(-1.0))).collect();
        let f = fit_loglog(&pts).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-10);
        assert!(fit_loglog(&pts[..1]).is_none());
    }

    #[test]
    fn budget_lists() {
        assert_eq!(parse_budgets("1000, 2e3,4000").unwrap(), vec![1e3, 2e3, 4e3]);
        assert!(parse_budgets("1000,x").is_err());
        assert!(parse_budgets("-1").is_err());
    }
}
