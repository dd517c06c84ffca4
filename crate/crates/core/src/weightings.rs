//! Likelihood-free weightings: ABC acceptance fraction, Gaussian synthetic
//! likelihood and pseudo-marginal averaging.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{SimulationOutput, Weighting};

fn check_batch(batch: &[SimulationOutput], y0: &[f64]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::invalid("weighting needs at least one replicate"));
    }
    for s in batch {
        if s.y.len() != y0.len() {
            return Err(Error::DimensionMismatch {
                expected: y0.len(),
                got: s.y.len(),
            });
        }
    }
    Ok(())
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbcConfig {
    pub epsilon: f64,
}

impl AbcConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid(format!("ABC threshold must be positive, got {epsilon}")));
        }
        Ok(Self { epsilon })
    }
}

/// Fraction of replicates strictly within `epsilon` of `y0` in Euclidean distance.
pub fn abc_weight(batch: &[SimulationOutput], y0: &[f64], config: &AbcConfig) -> Result<f64> {
    check_batch(batch, y0)?;
    let hits = batch
        .iter()
        .filter(|s| euclidean(&s.y, y0) < config.epsilon)
        .count();
    Ok(hits as f64 / batch.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BslConfig {
    pub replicates: usize,
    #[serde(default = "default_jitter")]
    pub covariance_jitter: f64,
}

fn default_jitter() -> f64 {
    1e-8
}

impl BslConfig {
    pub fn new(replicates: usize, covariance_jitter: f64) -> Result<Self> {
        if replicates < 2 {
            return Err(Error::invalid("synthetic likelihood needs at least two replicates"));
        }
        if !(covariance_jitter >= 0.0) {
            return Err(Error::invalid("covariance jitter must be nonnegative"));
        }
        Ok(Self {
            replicates,
            covariance_jitter,
        })
    }
}

/// Smallest acceptable Cholesky pivot, relative to the largest diagonal entry.
const SINGULAR_PIVOT: f64 = 1e-12;

fn cholesky_checked(cov: &DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let scale = cov.diagonal().iter().cloned().fold(0.0_f64, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    let chol = cov.clone().cholesky()?;
    let l = chol.l_dirty();
    let min_pivot = (0..cov.nrows()).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
    if min_pivot * min_pivot < SINGULAR_PIVOT * scale {
        return None;
    }
    Some(chol)
}

/// Log of the Gaussian density of `y0` under the empirical mean and covariance
/// (divisor `K`) of the batch.
pub fn bsl_log_weight(batch: &[SimulationOutput], y0: &[f64], config: &BslConfig) -> Result<f64> {
    check_batch(batch, y0)?;
    let k = batch.len();
    if k < 2 {
        return Err(Error::invalid("synthetic likelihood needs at least two replicates"));
    }
    let d = y0.len();
    let mut mean = DVector::<f64>::zeros(d);
    for s in batch {
        mean += DVector::from_column_slice(&s.y);
    }
    mean /= k as f64;
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for s in batch {
        let r = DVector::from_column_slice(&s.y) - &mean;
        cov.ger(1.0, &r, &r, 1.0);
    }
    cov /= k as f64;

    let chol = match cholesky_checked(&cov) {
        Some(c) => c,
        None if config.covariance_jitter > 0.0 => {
            cov += DMatrix::identity(d, d) * config.covariance_jitter;
            cov.cholesky().ok_or(Error::SingularCovariance)?
        }
        None => return Err(Error::SingularCovariance),
    };
    let resid = DVector::from_column_slice(y0) - mean;
    let z = chol
        .l_dirty()
        .solve_lower_triangular(&resid)
        .ok_or(Error::SingularCovariance)?;
    let log_det: f64 = (0..d).map(|i| chol.l_dirty()[(i, i)].ln()).sum::<f64>() * 2.0;
    Ok(-0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + z.norm_squared()))
}

/// Synthetic likelihood weighting on the natural scale.
pub fn bsl_weight(batch: &[SimulationOutput], y0: &[f64], config: &BslConfig) -> Result<f64> {
    bsl_log_weight(batch, y0, config).map(f64::exp)
}

/// Mean of observation densities `h(y0|θ,x_k)` over latent draws.
pub fn pseudo_marginal_weight(obs_density_values: &[f64]) -> Result<f64> {
    if obs_density_values.is_empty() {
        return Err(Error::invalid("pseudo-marginal weighting needs at least one latent draw"));
    }
    Ok(obs_density_values.iter().sum::<f64>() / obs_density_values.len() as f64)
}

/// ABC weighting bound to observed data.
#[derive(Debug, Clone, PartialEq)]
pub struct Abc {
    pub y0: Vec<f64>,
    pub config: AbcConfig,
}

impl Weighting for Abc {
    fn weight(&self, _theta: &[f64], batch: &[SimulationOutput]) -> Result<f64> {
        abc_weight(batch, &self.y0, &self.config)
    }
}

/// Synthetic likelihood weighting bound to observed data.
#[derive(Debug, Clone, PartialEq)]
pub struct Bsl {
    pub y0: Vec<f64>,
    pub config: BslConfig,
}

impl Weighting for Bsl {
    fn weight(&self, _theta: &[f64], batch: &[SimulationOutput]) -> Result<f64> {
        bsl_weight(batch, &self.y0, &self.config)
    }
}

/// Pseudo-marginal weighting: simulator outputs are latent draws `x`, and
/// `density(θ, x)` evaluates the observation density of the data.
pub struct PseudoMarginal<F> {
    pub density: F,
}

impl<F> Weighting for PseudoMarginal<F>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    fn weight(&self, theta: &[f64], batch: &[SimulationOutput]) -> Result<f64> {
        let values: Vec<f64> = batch.iter().map(|s| (self.density)(theta, &s.y)).collect();
        pseudo_marginal_weight(&values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn out(y: Vec<f64>) -> SimulationOutput {
        SimulationOutput::new(y, 1.0)
    }

    #[test]
    fn abc_examples() {
        let cfg = AbcConfig::new(5.0).unwrap();
        let y0 = vec![1.0, 2.0];
        assert_eq!(abc_weight(&[out(y0.clone())], &y0, &cfg).unwrap(), 1.0);
        assert_eq!(abc_weight(&[out(vec![6.0, 2.0])], &y0, &cfg).unwrap(), 0.0);
        let batch: Vec<_> = [1.0, 2.0, 6.0, 10.0]
            .iter()
            .map(|d| out(vec![1.0 + d, 2.0]))
            .collect();
        assert_eq!(abc_weight(&batch, &y0, &cfg).unwrap(), 0.5);
        assert!(abc_weight(&[], &y0, &cfg).is_err());
        assert!(AbcConfig::new(0.0).is_err());
    }

    fn identity_batch(d: usize, center: &[f64]) -> Vec<SimulationOutput> {
        // 2d points at center ± sqrt(d)·e_i: mean is center, covariance is I.
        let s = (d as f64).sqrt();
        let mut batch = Vec::new();
        for i in 0..d {
            for sign in [-1.0, 1.0] {
                let mut y = center.to_vec();
                y[i] += sign * s;
                batch.push(out(y));
            }
        }
        batch
    }

    #[test]
    fn bsl_density_at_mean_with_identity_covariance() {
        let center: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let batch = identity_batch(10, &center);
        let cfg = BslConfig::new(batch.len(), 0.0).unwrap();
        let w = bsl_weight(&batch, &center, &cfg).unwrap();
        let expected = (2.0 * std::f64::consts::PI).powi(-5);
        assert!((w - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn bsl_identical_replicates_are_singular() {
        let batch = vec![out(vec![1.0, 2.0]), out(vec![1.0, 2.0])];
        let cfg = BslConfig::new(2, 0.0).unwrap();
        assert_eq!(bsl_weight(&batch, &[1.0, 2.0], &cfg), Err(Error::SingularCovariance));
        let jittered = BslConfig::new(2, 1e-2).unwrap();
        let w = bsl_weight(&batch, &[1.0, 2.0], &jittered).unwrap();
        assert!((w - 1.0 / (2.0 * std::f64::consts::PI * 1e-2)).abs() < 1e-9);
    }

    #[test]
    fn pseudo_marginal_examples() {
        assert_eq!(pseudo_marginal_weight(&[0.2]).unwrap(), 0.2);
        assert_eq!(pseudo_marginal_weight(&[0.0, 0.4]).unwrap(), 0.2);
        assert!(pseudo_marginal_weight(&[]).is_err());
    }

    fn random_batch(vals: &[f64], d: usize) -> Vec<SimulationOutput> {
        vals.chunks(d).map(|c| out(c.to_vec())).collect()
    }

    proptest! {
        #[test]
        fn abc_in_unit_interval_and_monotone(
            ds in prop::collection::vec(0.0f64..10.0, 1..20),
            idx in 0usize..20,
            extra in 0.0f64..5.0,
        ) {
            let cfg = AbcConfig::new(5.0).unwrap();
            let y0 = [0.0];
            let batch: Vec<_> = ds.iter().map(|d| out(vec![*d])).collect();
            let w = abc_weight(&batch, &y0, &cfg).unwrap();
            prop_assert!((0.0..=1.0).contains(&w));
            let mut farther = batch.clone();
            let i = idx % farther.len();
            farther[i].y[0] += extra;
            prop_assert!(abc_weight(&farther, &y0, &cfg).unwrap() <= w);
        }

        #[test]
        fn bsl_translation_and_rotation_invariance(
            vals in prop::collection::vec(-3.0f64..3.0, 24),
            y0 in prop::collection::vec(-1.0f64..1.0, 3),
            shift in prop::collection::vec(-10.0f64..10.0, 3),
            angles in prop::collection::vec(0.0f64..std::f64::consts::TAU, 3),
        ) {
            let d = 3;
            let batch = random_batch(&vals, d);
            let cfg = BslConfig::new(batch.len(), 0.0).unwrap();
            let base = bsl_log_weight(&batch, &y0, &cfg).unwrap();

            let t = |v: &[f64]| -> Vec<f64> { v.iter().zip(&shift).map(|(a, b)| a + b).collect() };
            let moved: Vec<_> = batch.iter().map(|s| out(t(&s.y))).collect();
            let moved_w = bsl_log_weight(&moved, &t(&y0), &cfg).unwrap();
            prop_assert!((moved_w - base).abs() < 1e-8 * (1.0 + base.abs()));

            let rot = nalgebra::Rotation3::from_euler_angles(angles[0], angles[1], angles[2]);
            let r = |v: &[f64]| -> Vec<f64> {
                (rot * nalgebra::Vector3::new(v[0], v[1], v[2])).iter().cloned().collect()
            };
            let rotated: Vec<_> = batch.iter().map(|s| out(r(&s.y))).collect();
            let rot_w = bsl_log_weight(&rotated, &r(&y0), &cfg).unwrap();
            prop_assert!((rot_w - base).abs() < 1e-8 * (1.0 + base.abs()));
        }
    }
}
