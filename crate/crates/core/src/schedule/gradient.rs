use crate::error::{Error, Result};

use super::accumulators::ScheduleEstimates;

/// Gradient of `(c̄_lo + Σ c_j ν_j)(V_mf + Σ V_j/ν_j)` with respect to `log ν`.
pub fn gradient(est: &ScheduleEstimates, nu: &[f64]) -> Vec<f64> {
    let cost: f64 = est.c_lo + est.c.iter().zip(nu).map(|(c, n)| c * n).sum::<f64>();
    let var: f64 = est.v_mf + est.v.iter().zip(nu).map(|(v, n)| v / n).sum::<f64>();
    nu.iter()
        .zip(est.c.iter().zip(&est.v))
        .map(|(n, (c, v))| n * c * var - v / n * cost)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub nu: Vec<f64>,
    /// The gradient was not finite and `ν` was left as is.
    pub skipped: bool,
}

/// One descent step in `log ν`, clamped to `[nu_min, nu_max]`.
pub fn gradient_step(est: &ScheduleEstimates, nu: &[f64], delta: f64, nu_min: f64, nu_max: f64) -> StepOutcome {
    let grad = gradient(est, nu);
    if grad.iter().any(|g| !g.is_finite()) {
        return StepOutcome {
            nu: nu.to_vec(),
            skipped: true,
        };
    }
    let nu = nu
        .iter()
        .zip(&grad)
        .map(|(n, g)| (n.ln() - delta * g).exp().clamp(nu_min, nu_max))
        .collect();
    StepOutcome { nu, skipped: false }
}

/// `ν_k* = sqrt((V_k/V_mf)/(c_k/c̄_lo))`, clamped. Cells with `V_k = 0` get
/// `nu_min` and cells with `c_k = 0` get `nu_max`.
pub fn nu_star(est: &ScheduleEstimates, nu_min: f64, nu_max: f64) -> Result<Vec<f64>> {
    if !(est.v_mf > 0.0) {
        return Err(Error::Undefined(format!("V_mf = {} is not positive", est.v_mf)));
    }
    if !(est.c_lo > 0.0) {
        return Err(Error::Undefined(format!("c_lo = {} is not positive", est.c_lo)));
    }
    Ok(est
        .c
        .iter()
        .zip(&est.v)
        .map(|(&c, &v)| {
            if v <= 0.0 {
                nu_min
            } else if c <= 0.0 {
                nu_max
            } else {
                ((v / est.v_mf) / (c / est.c_lo)).sqrt().clamp(nu_min, nu_max)
            }
        })
        .collect())
}
