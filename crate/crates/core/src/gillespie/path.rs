use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Arrival times of a unit-rate Poisson process, realised lazily from its
/// own stream.
#[derive(Debug, Clone)]
pub struct UnitPoissonPath {
    arrivals: Vec<f64>,
    rng: StreamRng,
}

impl UnitPoissonPath {
    pub fn new(rng: StreamRng) -> Self {
        Self {
            arrivals: Vec::new(),
            rng,
        }
    }

    /// A path whose first arrivals are `prefix`, continued from `rng`.
    pub fn from_prefix(prefix: Vec<f64>, rng: StreamRng) -> Result<Self> {
        let mut last = 0.0;
        for &a in &prefix {
            if !(a > last) && !(a == 0.0 && last == 0.0) {
                return Err(Error::invalid("path arrivals must be strictly increasing and nonnegative"));
            }
            last = a;
        }
        Ok(Self { arrivals: prefix, rng })
    }

    /// The `n`-th arrival (0-based).
    pub fn arrival(&mut self, n: usize) -> f64 {
        while self.arrivals.len() <= n {
            let last = self.arrivals.last().copied().unwrap_or(0.0);
            let gap: f64 = self.rng.sample(Exp1);
            self.arrivals.push(last + gap);
        }
        self.arrivals[n]
    }

    /// Arrivals realised so far.
    pub fn realized(&self) -> &[f64] {
        &self.arrivals
    }

    pub fn into_realized(self) -> Vec<f64> {
        self.arrivals
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn lazy_extension_is_deterministic() {
        let mut a = UnitPoissonPath::new(stream(3, 0));
        let mut b = UnitPoissonPath::new(stream(3, 0));
        let x = a.arrival(10);
        assert_eq!(b.arrival(4), a.realized()[4]);
        assert_eq!(b.arrival(10), x);
        assert!(a.realized().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn gaps_have_unit_mean() {
        let mut p = UnitPoissonPath::new(stream(1, 1));
        let n = 100_000;
        let t = p.arrival(n - 1);
        // mean gap 1, sd of the mean 1/sqrt(n)
        assert!((t / n as f64 - 1.0).abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn prefix_is_kept_and_validated() {
        let mut p = UnitPoissonPath::from_prefix(vec![0.5, 1.0], stream(0, 0)).unwrap();
        assert_eq!(p.arrival(1), 1.0);
        assert!(p.arrival(2) > 1.0);
        assert!(UnitPoissonPath::from_prefix(vec![1.0, 0.5], stream(0, 0)).is_err());
    }
}
