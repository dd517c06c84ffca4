//! Distributions for the number of high-fidelity corrections per iteration.

use rand_distr::{Binomial, Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// A family of nonnegative integer laws indexed by their mean.
pub trait CountLaw: Sync {
    fn sample(&self, mu: f64, rng: &mut StreamRng) -> Result<u64>;

    /// `E[M(M-1)]` at mean `mu`.
    fn second_factorial_moment(&self, mu: f64) -> f64;

    /// `P(M = 0)` at mean `mu`.
    fn prob_zero(&self, mu: f64) -> f64;

    /// `Var(M)` at mean `mu`.
    fn variance(&self, mu: f64) -> f64 {
        self.second_factorial_moment(mu) + mu - mu * mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MLaw {
    #[default]
    Poisson,
    Binomial {
        max: u64,
    },
    Geometric,
}

impl MLaw {
    pub fn validate(&self, mu: f64) -> Result<()> {
        crate::inference::types::check_positive_mu(mu)?;
        if let MLaw::Binomial { max } = *self {
            if max == 0 {
                return Err(Error::invalid("binomial law needs a positive maximum"));
            }
            if mu > max as f64 {
                return Err(Error::invalid(format!(
                    "mean {mu} exceeds binomial maximum {max}"
                )));
            }
        }
        Ok(())
    }
}

impl CountLaw for MLaw {
    fn sample(&self, mu: f64, rng: &mut StreamRng) -> Result<u64> {
        self.validate(mu)?;
        let m = match *self {
            MLaw::Poisson => {
                let d = Poisson::new(mu).map_err(|e| Error::invalid(e.to_string()))?;
                d.sample(rng) as u64
            }
            MLaw::Binomial { max } => {
                let p = (mu / max as f64).min(1.0);
                let d = Binomial::new(max, p).map_err(|e| Error::invalid(e.to_string()))?;
                d.sample(rng)
            }
            MLaw::Geometric => {
                // failures before the first success, mean (1-p)/p = mu
                let p = 1.0 / (1.0 + mu);
                let d = Geometric::new(p).map_err(|e| Error::invalid(e.to_string()))?;
                d.sample(rng)
            }
        };
        Ok(m)
    }

    fn second_factorial_moment(&self, mu: f64) -> f64 {
        match *self {
            MLaw::Poisson => mu * mu,
            MLaw::Binomial { max } => mu * mu * (1.0 - 1.0 / max as f64),
            MLaw::Geometric => 2.0 * mu * mu,
        }
    }

    fn prob_zero(&self, mu: f64) -> f64 {
        match *self {
            MLaw::Poisson => (-mu).exp(),
            MLaw::Binomial { max } => (1.0 - mu / max as f64).max(0.0).powi(max as i32),
            MLaw::Geometric => 1.0 / (1.0 + mu),
        }
    }
}

/// Always returns the same count; useful for reductions and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedCount(pub u64);

impl CountLaw for FixedCount {
    fn sample(&self, _mu: f64, _rng: &mut StreamRng) -> Result<u64> {
        Ok(self.0)
    }

    fn second_factorial_moment(&self, _mu: f64) -> f64 {
        let m = self.0 as f64;
        m * (m - 1.0)
    }

    fn prob_zero(&self, _mu: f64) -> f64 {
        if self.0 == 0 {
            1.0
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn moments(law: MLaw, mu: f64, n: usize) -> (f64, f64) {
        let mut rng = stream(11, 0);
        let xs: Vec<f64> = (0..n)
            .map(|_| law.sample(mu, &mut rng).unwrap() as f64)
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, var)
    }

    #[test]
    fn laws_have_requested_mean_and_variance() {
        let n = 200_000;
        for law in [MLaw::Poisson, MLaw::Binomial { max: 3 }, MLaw::Geometric] {
            let mu = 1.3;
            let (mean, var) = moments(law, mu, n);
            let se = (law.variance(mu) / n as f64).sqrt();
            assert!((mean - mu).abs() < 4.0 * se, "{law:?}: mean {mean}");
            assert!((var - law.variance(mu)).abs() / law.variance(mu) < 0.03, "{law:?}: var {var}");
        }
    }

    #[test]
    fn variance_formulas() {
        assert_eq!(MLaw::Poisson.variance(2.0), 2.0);
        assert!((MLaw::Binomial { max: 4 }.variance(2.0) - 2.0 * (1.0 - 0.5)).abs() < 1e-12);
        assert!((MLaw::Geometric.variance(2.0) - 2.0 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_rejects_mean_above_max() {
        let mut rng = stream(0, 0);
        assert!(MLaw::Binomial { max: 2 }.sample(2.5, &mut rng).is_err());
        assert!(MLaw::Binomial { max: 2 }.sample(2.0, &mut rng).is_ok());
        assert!(MLaw::Poisson.sample(0.0, &mut rng).is_err());
    }
}
