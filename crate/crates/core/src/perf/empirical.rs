//! Plug-in estimates of the performance functionals from a sample log.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{CountLaw, LogRow};

/// Estimated constants and functionals at the mean function used in the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPerf {
    pub n: usize,
    pub g_bar: f64,
    pub c_bar_lo: f64,
    pub c_bar_hi: f64,
    pub v_hi: f64,
    pub v_mf: f64,
    pub e_mf: f64,
    pub j_hi_hat: f64,
    pub j_mf_hat: f64,
    /// Plug-in left-hand side of the existence condition; values near 1 are
    /// not statistically decidable.
    pub lhs_margin: f64,
    pub predicate: bool,
}

/// Estimates from rows of a multifidelity run that used escalation `law`.
///
/// Each high-fidelity quantity is an average over escalated batches scaled by
/// `1/μ_i` (cross products by `1/E[m(m−1)]`), which is unbiased for the
/// integral against `ρ`. The existence term needs a square root of
/// conditional means and is a consistent but biased plug-in.
pub fn empirical_perf(rows: &[LogRow], law: &dyn CountLaw) -> Result<EmpiricalPerf> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::DegenerateSample);
    }
    let sum_w: f64 = rows.iter().map(|r| r.w).sum();
    if sum_w == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let g_bar = rows.iter().map(|r| r.w * r.g).sum::<f64>() / sum_w;
    let nf = n as f64;
    let (mut c_lo, mut c_hi, mut v_hi, mut v_mf, mut e_mf) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut cost_hi, mut eta_term, mut law_term, mut exist) = (0.0, 0.0, 0.0, 0.0);
    for r in rows {
        if !(r.mu > 0.0) {
            return Err(Error::invalid(format!("row {} has nonpositive μ", r.i)));
        }
        let mu = r.mu;
        let d2 = ((r.g - g_bar) * r.ratio).powi(2);
        c_lo += r.cost_lo;
        cost_hi += r.cost_hi_total;
        let f2 = law.second_factorial_moment(mu);
        // E[m(m−1)]/μ² − 1: zero for Poisson, −1/max for binomial, 1 for geometric
        let excess = f2 / (mu * mu) - 1.0;
        if r.m == 0 {
            let e = d2 * r.omega_lo * r.omega_lo;
            e_mf += e;
            law_term += excess * e;
            continue;
        }
        let m = r.m as f64;
        let sum: f64 = r.omega_hi_list.iter().sum();
        let squares: f64 = r.omega_hi_list.iter().map(|w| w * w).sum();
        let disagreement: f64 = r.omega_hi_list.iter().map(|w| (w - r.omega_lo).powi(2)).sum();
        let lambda2 = if f2 > 0.0 { (sum * sum - squares) / f2 } else { 0.0 };
        c_hi += r.cost_hi_total / mu;
        v_hi += d2 * squares / mu;
        v_mf += d2 * lambda2;
        let e = d2 * (lambda2 - 2.0 * r.omega_lo * sum / mu + r.omega_lo * r.omega_lo);
        e_mf += e;
        law_term += excess * e;
        eta_term += d2 * disagreement / (mu * mu);
        let p_escalate = 1.0 - law.prob_zero(mu);
        if p_escalate > 0.0 {
            exist += (d2 * (disagreement / m) * (r.cost_hi_total / m)).sqrt() / p_escalate;
        }
    }
    let c_bar_lo = c_lo / nf;
    let c_bar_hi = c_hi / nf;
    let v_hi = v_hi / nf;
    let v_mf = v_mf / nf;
    let e_mf = e_mf / nf;
    let j_hi_hat = c_bar_hi * v_hi;
    let j_mf_hat = (c_bar_lo + cost_hi / nf) * (v_mf + (eta_term + law_term) / nf);
    let lhs_margin = ((c_bar_lo / c_bar_hi) * (v_mf.max(0.0) / v_hi)).sqrt() + exist / nf / (v_hi * c_bar_hi).sqrt();
    Ok(EmpiricalPerf {
        n,
        g_bar,
        c_bar_lo,
        c_bar_hi,
        v_hi,
        v_mf,
        e_mf,
        j_hi_hat,
        j_mf_hat,
        lhs_margin,
        predicate: lhs_margin < 1.0,
    })
}
