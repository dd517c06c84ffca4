//! Interfaces between the samplers and the statistical model.

use rand::Rng;

use crate::error::{Error, Result};
use crate::inference::types::SimulationOutput;
use crate::rng::StreamRng;

/// Prior density `π(θ)`.
pub trait Prior: Sync {
    fn density(&self, theta: &[f64]) -> f64;
}

/// Importance distribution `q`: sampleable, with known density.
pub trait Proposal: Sync {
    fn sample(&self, rng: &mut StreamRng) -> Vec<f64>;
    fn density(&self, theta: &[f64]) -> f64;
}

/// Draws one dataset `y ~ f(·|θ)`.
pub trait Simulator: Sync {
    fn simulate(&self, theta: &[f64], rng: &mut StreamRng) -> Result<SimulationOutput>;
}

/// A low/high fidelity model pair where high-fidelity draws may reuse
/// randomness retained from the low-fidelity draw.
pub trait CoupledSimulator: Sync {
    /// State carried from a low-fidelity draw into its coupled high-fidelity draws.
    type Coupling: Send + Sync;

    fn simulate_lo(
        &self,
        theta: &[f64],
        rng: &mut StreamRng,
    ) -> Result<(SimulationOutput, Self::Coupling)>;

    /// One draw from `f_hi(·|θ, y_lo)`. Repeated calls with the same coupling
    /// must be conditionally independent given it.
    fn simulate_hi(
        &self,
        theta: &[f64],
        coupling: &Self::Coupling,
        rng: &mut StreamRng,
    ) -> Result<SimulationOutput>;
}

/// A likelihood-free weighting `ω(θ, y)` over a batch of replicates.
pub trait Weighting: Sync {
    fn weight(&self, theta: &[f64], batch: &[SimulationOutput]) -> Result<f64>;
}

/// Conditional mean `μ(θ, y_lo)` of the escalation count.
pub trait MeanFn: Sync {
    fn mean(&self, theta: &[f64], y_lo: &[SimulationOutput]) -> Result<f64>;
}

/// Constant escalation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantMean(pub f64);

impl MeanFn for ConstantMean {
    fn mean(&self, _theta: &[f64], _y_lo: &[SimulationOutput]) -> Result<f64> {
        Ok(self.0)
    }
}

impl<F> MeanFn for F
where
    F: Fn(&[f64], &[SimulationOutput]) -> f64 + Sync,
{
    fn mean(&self, theta: &[f64], y_lo: &[SimulationOutput]) -> Result<f64> {
        Ok(self(theta, y_lo))
    }
}

/// Product of independent uniforms on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBox {
    low: Vec<f64>,
    high: Vec<f64>,
    density: f64,
}

impl UniformBox {
    pub fn new(low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        if low.len() != high.len() || low.is_empty() {
            return Err(Error::invalid("uniform box bounds must be non-empty and equal length"));
        }
        if low.iter().zip(&high).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::invalid("uniform box needs finite low < high in every coordinate"));
        }
        let volume: f64 = low.iter().zip(&high).map(|(l, h)| h - l).product();
        Ok(Self {
            low,
            high,
            density: 1.0 / volume,
        })
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.low.len()
            && theta
                .iter()
                .zip(self.low.iter().zip(&self.high))
                .all(|(x, (l, h))| *l <= *x && *x <= *h)
    }
}

impl Prior for UniformBox {
    fn density(&self, theta: &[f64]) -> f64 {
        if self.contains(theta) {
            self.density
        } else {
            0.0
        }
    }
}

impl Proposal for UniformBox {
    fn sample(&self, rng: &mut StreamRng) -> Vec<f64> {
        self.low
            .iter()
            .zip(&self.high)
            .map(|(l, h)| l + (h - l) * rng.random::<f64>())
            .collect()
    }

    fn density(&self, theta: &[f64]) -> f64 {
        Prior::density(self, theta)
    }
}

/// Finitely supported distribution over parameter atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Discrete {
    atoms: Vec<Vec<f64>>,
    probs: Vec<f64>,
}

impl Discrete {
    pub fn new(atoms: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != probs.len() {
            return Err(Error::invalid("discrete law needs one probability per atom"));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::invalid("discrete probabilities must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("discrete probabilities sum to {total}, not 1")));
        }
        Ok(Self { atoms, probs })
    }

    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let n = atoms.len().max(1);
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mass(&self, theta: &[f64]) -> f64 {
        self.atoms
            .iter()
            .zip(&self.probs)
            .filter(|(a, _)| a.as_slice() == theta)
            .map(|(_, p)| *p)
            .sum()
    }
}

impl Prior for Discrete {
    fn density(&self, theta: &[f64]) -> f64 {
        self.mass(theta)
    }
}

impl Proposal for Discrete {
    fn sample(&self, rng: &mut StreamRng) -> Vec<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (atom, p) in self.atoms.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return atom.clone();
            }
        }
        // rounding in the cumulative sum
        self.atoms
            .iter()
            .zip(&self.probs)
            .rev()
            .find(|(_, p)| **p > 0.0)
            .map(|(a, _)| a.clone())
            .unwrap_or_else(|| self.atoms[0].clone())
    }

    fn density(&self, theta: &[f64]) -> f64 {
        self.mass(theta)
    }
}
