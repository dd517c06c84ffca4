use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Propensity `v(x, θ, t)`. Evaluated only at event times, so any time
/// dependence is treated as piecewise constant between events.
pub type Propensity = Arc<dyn Fn(&[i64], &[f64], f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Reaction {
    pub name: String,
    pub change: Vec<i64>,
    pub propensity: Propensity,
}

impl fmt::Debug for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reaction")
            .field("name", &self.name)
            .field("change", &self.change)
            .finish_non_exhaustive()
    }
}

/// A stochastic reaction network with optional linear conservation laws
/// (weight vectors `w` with `w·x` constant), checked after every event.
#[derive(Debug, Clone)]
pub struct ReactionNetwork {
    pub species: Vec<String>,
    pub reactions: Vec<Reaction>,
    pub initial_state: Vec<i64>,
    pub conservation: Vec<Vec<i64>>,
}

impl ReactionNetwork {
    pub fn new(species: Vec<String>, reactions: Vec<Reaction>, initial_state: Vec<i64>) -> Result<Self> {
        let n = species.len();
        if initial_state.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: initial_state.len(),
            });
        }
        if initial_state.iter().any(|&x| x < 0) {
            return Err(Error::invalid("initial state must be nonnegative"));
        }
        for r in &reactions {
            if r.change.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.change.len(),
                });
            }
        }
        Ok(Self {
            species,
            reactions,
            initial_state,
            conservation: Vec::new(),
        })
    }

    /// Adds a conservation law; every reaction must leave `w·x` unchanged.
    pub fn with_conservation(mut self, weights: Vec<i64>) -> Result<Self> {
        if weights.len() != self.species.len() {
            return Err(Error::DimensionMismatch {
                expected: self.species.len(),
                got: weights.len(),
            });
        }
        for r in &self.reactions {
            if dot(&weights, &r.change) != 0 {
                return Err(Error::invalid(format!(
                    "reaction {} does not conserve the given weights",
                    r.name
                )));
            }
        }
        self.conservation.push(weights);
        Ok(self)
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    pub fn propensities(&self, state: &[i64], theta: &[f64], t: f64) -> Vec<f64> {
        self.reactions
            .iter()
            .map(|r| (r.propensity)(state, theta, t))
            .collect()
    }
}

pub(crate) fn dot(w: &[i64], x: &[i64]) -> i64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Mass-action combinatorial factor `Π x_i (x_i − 1) ⋯ (x_i − r_i + 1)`.
pub fn mass_action_factor(state: &[i64], reactants: &[u32]) -> f64 {
    let mut h = 1.0;
    for (&x, &r) in state.iter().zip(reactants) {
        for j in 0..r as i64 {
            let f = x - j;
            if f <= 0 {
                return 0.0;
            }
            h *= f as f64;
        }
    }
    h
}

/// Mass-action reaction with rate constant `θ[index]` when `θ` has one
/// entry per reaction of its network, and `default_rate` otherwise.
pub fn mass_action(
    name: impl Into<String>,
    reactants: Vec<u32>,
    products: Vec<u32>,
    index: usize,
    n_reactions: usize,
    default_rate: f64,
) -> Reaction {
    let change = products
        .iter()
        .zip(&reactants)
        .map(|(&p, &r)| p as i64 - r as i64)
        .collect();
    let propensity: Propensity = Arc::new(move |x: &[i64], theta: &[f64], _t: f64| {
        let k = if theta.len() == n_reactions {
            theta[index]
        } else {
            default_rate
        };
        k * mass_action_factor(x, &reactants)
    });
    Reaction {
        name: name.into(),
        change,
        propensity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_action_counts_ordered_combinations() {
        assert_eq!(mass_action_factor(&[3, 4], &[1, 1]), 12.0);
        assert_eq!(mass_action_factor(&[3, 4], &[2, 0]), 6.0);
        assert_eq!(mass_action_factor(&[1, 4], &[2, 0]), 0.0);
        assert_eq!(mass_action_factor(&[0, 4], &[0, 0]), 1.0);
    }

    #[test]
    fn conservation_must_hold_for_every_reaction() {
        let r = mass_action("A->B", vec![1, 0], vec![0, 1], 0, 1, 1.0);
        let net = ReactionNetwork::new(vec!["A".into(), "B".into()], vec![r], vec![5, 0]).unwrap();
        assert!(net.clone().with_conservation(vec![1, 1]).is_ok());
        assert!(net.with_conservation(vec![1, 0]).is_err());
    }

    #[test]
    fn theta_overrides_default_rates_only_at_full_length() {
        let r = mass_action("A->", vec![1], vec![0], 0, 1, 2.0);
        assert_eq!((r.propensity)(&[3], &[], 0.0), 6.0);
        assert_eq!((r.propensity)(&[3], &[5.0], 0.0), 15.0);
    }
}
