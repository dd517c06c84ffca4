//! Self-normalised estimate of the posterior mean and its leading-order error.

use crate::error::{Error, Result};
use crate::inference::types::{EstimatorReport, Weighted};

fn weight_sum<T: Weighted>(samples: &[T]) -> f64 {
    samples.iter().map(Weighted::weight).sum()
}

/// `Σ wᵢG(θᵢ) / Σ wⱼ`.
pub fn estimate_g<T: Weighted>(samples: &[T]) -> Result<f64> {
    let sw = weight_sum(samples);
    if sw == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let swg: f64 = samples.iter().map(|s| s.weight() * s.g_value()).sum();
    Ok(swg / sw)
}

/// `mean(w²Δ̂²) / mean(w)²` with `Δ̂ = G − Ĝ`.
fn normalised_second_moment<T: Weighted>(samples: &[T]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::invalid("at least two samples are needed for an error estimate"));
    }
    let g_hat = estimate_g(samples)?;
    let n = samples.len() as f64;
    let mean_w = weight_sum(samples) / n;
    let mean_sq = samples
        .iter()
        .map(|s| (s.weight() * (s.g_value() - g_hat)).powi(2))
        .sum::<f64>()
        / n;
    Ok(mean_sq / (mean_w * mean_w))
}

/// Plug-in leading-order mean squared error of [`estimate_g`].
pub fn estimate_mse<T: Weighted>(samples: &[T]) -> Result<f64> {
    Ok(normalised_second_moment(samples)? / samples.len() as f64)
}

/// Empirical `E(C)·E(w²Δ²)/E(w)²`: MSE times budget, to leading order.
pub fn estimate_j_coefficient<T: Weighted>(samples: &[T]) -> Result<f64> {
    let ratio = normalised_second_moment(samples)?;
    let mean_cost = samples.iter().map(Weighted::cost).sum::<f64>() / samples.len() as f64;
    Ok(mean_cost * ratio)
}

pub fn report<T: Weighted>(samples: &[T]) -> Result<EstimatorReport> {
    let n = samples.len();
    let g_hat = estimate_g(samples)?;
    let total_cost: f64 = samples.iter().map(Weighted::cost).sum();
    let (variance_estimate, j_coefficient) = if n >= 2 {
        (estimate_mse(samples)?, estimate_j_coefficient(samples)?)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(EstimatorReport {
        g_hat,
        mean_weight: weight_sum(samples) / n as f64,
        variance_estimate,
        j_coefficient,
        n,
        total_cost,
    })
}
