//! A two-point coin model with an exactly enumerable multifidelity structure.
//!
//! `θ = p ∈ {0.25, 0.75}`, `y_hi ~ Bernoulli(p)` and `y_lo = 1{U < p + shift}`.
//! A high-fidelity draw given `y_lo` redraws `U` from its conditional law
//! given `y_lo`, so it is marginally exact and correlated with `y_lo`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::inference::{CoupledSimulator, Discrete, SimulationOutput, Simulator};
use crate::perf::{FiniteHi, FiniteLo, FiniteModel, FiniteTheta};
use crate::rng::StreamRng;
use crate::weightings::{Abc, AbcConfig};

pub const COIN_ATOMS: [f64; 2] = [0.25, 0.75];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinModel {
    pub shift: f64,
    pub cost_lo: f64,
    pub cost_hi: f64,
}

impl Default for CoinModel {
    fn default() -> Self {
        Self {
            shift: 0.1,
            cost_lo: 1.0,
            cost_hi: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinCoupling {
    pub y_lo: bool,
    pub p_lo: f64,
}

impl CoinModel {
    pub fn p_lo(&self, p: f64) -> f64 {
        (p + self.shift).clamp(0.0, 1.0)
    }

    /// `P(y_hi = 1 | y_lo)`.
    pub fn hi_given_lo(&self, p: f64, y_lo: bool) -> f64 {
        let p_lo = self.p_lo(p);
        if y_lo {
            if p_lo > 0.0 {
                p.min(p_lo) / p_lo
            } else {
                0.0
            }
        } else if p_lo < 1.0 {
            (p - p_lo).max(0.0) / (1.0 - p_lo)
        } else {
            0.0
        }
    }

    /// Uniform prior over [`COIN_ATOMS`].
    pub fn prior() -> Discrete {
        Discrete::uniform(COIN_ATOMS.iter().map(|&p| vec![p]).collect())
            .expect("two distinct atoms")
    }

    /// Indicator that the flip came up heads.
    pub fn weighting() -> Abc {
        Abc {
            y0: vec![1.0],
            config: AbcConfig { epsilon: 0.5 },
        }
    }

    /// The exact outcome law with proposal masses `q` over [`COIN_ATOMS`] and
    /// target `G(p) = p`.
    pub fn finite_model(&self, q: [f64; 2]) -> FiniteModel {
        let thetas = COIN_ATOMS
            .iter()
            .zip(q)
            .map(|(&p, q)| {
                let p_lo = self.p_lo(p);
                let lo = [(true, p_lo), (false, 1.0 - p_lo)]
                    .into_iter()
                    .map(|(y, prob)| {
                        let h = self.hi_given_lo(p, y);
                        FiniteLo {
                            y_lo: flag(y),
                            prob,
                            omega_lo: if y { 1.0 } else { 0.0 },
                            cost: self.cost_lo,
                            hi: vec![
                                FiniteHi { prob: h, omega: 1.0, cost: self.cost_hi },
                                FiniteHi { prob: 1.0 - h, omega: 0.0, cost: self.cost_hi },
                            ],
                        }
                    })
                    .collect();
                FiniteTheta {
                    theta: vec![p],
                    q,
                    prior: 0.5,
                    g: p,
                    lo,
                }
            })
            .collect();
        FiniteModel { thetas }
    }

    /// `E(p | heads)` under the uniform prior.
    pub fn posterior_mean() -> f64 {
        let num: f64 = COIN_ATOMS.iter().map(|p| p * p).sum();
        let den: f64 = COIN_ATOMS.iter().sum();
        num / den
    }
}

fn coin_p(theta: &[f64]) -> Result<f64> {
    match theta {
        [p] if (0.0..=1.0).contains(p) => Ok(*p),
        [p] => Err(Error::invalid(format!("coin probability {p} outside [0, 1]"))),
        _ => Err(Error::DimensionMismatch {
            expected: 1,
            got: theta.len(),
        }),
    }
}

fn flag(b: bool) -> Vec<f64> {
    vec![if b { 1.0 } else { 0.0 }]
}

impl Simulator for CoinModel {
    fn simulate(&self, theta: &[f64], rng: &mut StreamRng) -> Result<SimulationOutput> {
        let p = coin_p(theta)?;
        Ok(SimulationOutput::new(flag(rng.random::<f64>() < p), self.cost_hi))
    }
}

impl CoupledSimulator for CoinModel {
    type Coupling = CoinCoupling;

    fn simulate_lo(&self, theta: &[f64], rng: &mut StreamRng) -> Result<(SimulationOutput, CoinCoupling)> {
        let p = coin_p(theta)?;
        let p_lo = self.p_lo(p);
        let y_lo = rng.random::<f64>() < p_lo;
        Ok((SimulationOutput::new(flag(y_lo), self.cost_lo), CoinCoupling { y_lo, p_lo }))
    }

    fn simulate_hi(&self, theta: &[f64], c: &CoinCoupling, rng: &mut StreamRng) -> Result<SimulationOutput> {
        let p = coin_p(theta)?;
        let v: f64 = rng.random();
        let u = if c.y_lo { v * c.p_lo } else { c.p_lo + v * (1.0 - c.p_lo) };
        Ok(SimulationOutput::new(flag(u < p), self.cost_hi))
    }
}
