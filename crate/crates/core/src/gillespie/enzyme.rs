//! Enzyme kinetics `S + E ⇌ C → P + E` and its Michaelis–Menten reduction
//! `S → P`, coupled through the product channel.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{fork, StreamRng};

use super::network::{Propensity, Reaction, ReactionNetwork};
use super::path::UnitPoissonPath;
use super::simulate::{simulate, StopRule, Threshold, Trajectory};

pub const S0: i64 = 100;
pub const E0: i64 = 5;

/// Observed product threshold times.
pub const Y0: [f64; 10] = [1.73, 3.80, 5.95, 8.10, 11.17, 12.92, 15.50, 17.75, 20.17, 23.67];

pub const PRIOR_LOW: [f64; 3] = [10.0, 10.0, 0.1];
pub const PRIOR_HIGH: [f64; 3] = [100.0, 100.0, 10.0];

/// Index of `C → P + E` in [`enzyme_hi`]; it shares its path with the single
/// channel of [`enzyme_lo`].
pub const HI_PRODUCT_CHANNEL: usize = 2;
pub const LO_PRODUCT_CHANNEL: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnzymeParams {
    pub k1: f64,
    pub k_minus1: f64,
    pub k2: f64,
}

impl EnzymeParams {
    pub fn new(k1: f64, k_minus1: f64, k2: f64) -> Result<Self> {
        let p = Self { k1, k_minus1, k2 };
        for (i, v) in p.to_vec().iter().enumerate() {
            if !(PRIOR_LOW[i]..=PRIOR_HIGH[i]).contains(v) {
                return Err(Error::invalid(format!(
                    "rate {i} = {v} outside [{}, {}]",
                    PRIOR_LOW[i], PRIOR_HIGH[i]
                )));
            }
        }
        Ok(p)
    }

    pub fn from_slice(theta: &[f64]) -> Result<Self> {
        match theta {
            [a, b, c] => Self::new(*a, *b, *c),
            _ => Err(Error::DimensionMismatch {
                expected: 3,
                got: theta.len(),
            }),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.k1, self.k_minus1, self.k2]
    }

    pub fn michaelis_constant(&self) -> f64 {
        (self.k_minus1 + self.k2) / self.k1
    }
}

fn reaction(name: &str, change: Vec<i64>, f: impl Fn(&[i64], &[f64]) -> f64 + Send + Sync + 'static) -> Reaction {
    let propensity: Propensity = Arc::new(move |x, theta, _t| f(x, theta));
    Reaction {
        name: name.into(),
        change,
        propensity,
    }
}

/// Species `(S, E, C, P)`; `θ = (k₁, k₋₁, k₂)`.
pub fn enzyme_hi() -> ReactionNetwork {
    let reactions = vec![
        reaction("S+E->C", vec![-1, -1, 1, 0], |x, th| th[0] * (x[0] * x[1]) as f64),
        reaction("C->S+E", vec![1, 1, -1, 0], |x, th| th[1] * x[2] as f64),
        reaction("C->P+E", vec![0, 1, -1, 1], |x, th| th[2] * x[2] as f64),
    ];
    ReactionNetwork::new(
        ["S", "E", "C", "P"].map(String::from).to_vec(),
        reactions,
        vec![S0, E0, 0, 0],
    )
    .and_then(|n| n.with_conservation(vec![0, 1, 1, 0]))
    .and_then(|n| n.with_conservation(vec![1, 0, 1, 1]))
    .expect("enzyme network is well formed")
}

/// Michaelis–Menten propensity `k₂·min(S, E₀)/(K_MM + S)·S`.
pub fn michaelis_menten_rate(s: i64, theta: &[f64]) -> f64 {
    if s <= 0 {
        return 0.0;
    }
    let k_mm = (theta[1] + theta[2]) / theta[0];
    theta[2] * s.min(E0) as f64 / (k_mm + s as f64) * s as f64
}

/// Species `(S, P)`; `θ = (k₁, k₋₁, k₂)`.
pub fn enzyme_lo() -> ReactionNetwork {
    let reactions = vec![reaction("S->P", vec![-1, 1], |x, th| michaelis_menten_rate(x[0], th))];
    ReactionNetwork::new(vec!["S".into(), "P".into()], reactions, vec![S0, 0])
        .and_then(|n| n.with_conservation(vec![1, 1]))
        .expect("reduced network is well formed")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnzymeSettings {
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_event_cap")]
    pub event_cap: u64,
}

fn default_t_max() -> f64 {
    1e3
}

fn default_event_cap() -> u64 {
    1_000_000
}

impl Default for EnzymeSettings {
    fn default() -> Self {
        Self {
            t_max: default_t_max(),
            event_cap: default_event_cap(),
        }
    }
}

impl EnzymeSettings {
    fn stop(&self, product: usize) -> StopRule {
        StopRule {
            threshold: Some(Threshold {
                species: product,
                levels: (1..=10).map(|n| 10 * n).collect(),
            }),
            t_max: self.t_max,
            event_cap: self.event_cap,
        }
    }

    pub fn hi_stop(&self) -> StopRule {
        self.stop(3)
    }

    pub fn lo_stop(&self) -> StopRule {
        self.stop(1)
    }
}

/// An uncoupled high-fidelity trajectory.
pub fn simulate_hi(theta: &[f64], rng: &mut StreamRng, settings: &EnzymeSettings) -> Result<Trajectory> {
    simulate(&enzyme_hi(), theta, rng, vec![], &settings.hi_stop(), false)
}

/// A low-fidelity trajectory together with the product-channel arrivals it
/// realised, from which coupled high-fidelity draws are generated.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub lo: Trajectory,
    pub shared: Arc<Vec<f64>>,
}

pub fn simulate_coupled_pair(
    theta: &[f64],
    rng: &mut StreamRng,
    settings: &EnzymeSettings,
) -> Result<CoupledPair> {
    let path = UnitPoissonPath::new(fork(rng));
    let mut lo = simulate(&enzyme_lo(), theta, rng, vec![Some(path)], &settings.lo_stop(), false)?;
    let shared = lo.paths.swap_remove(LO_PRODUCT_CHANNEL).into_realized();
    lo.paths.clear();
    Ok(CoupledPair {
        lo,
        shared: Arc::new(shared),
    })
}

impl CoupledPair {
    pub fn hi(&self, theta: &[f64], rng: &mut StreamRng, settings: &EnzymeSettings) -> Result<Trajectory> {
        simulate_hi_coupled(theta, &self.shared, rng, settings)
    }
}

/// One high-fidelity draw whose product channel follows the `shared` arrivals.
/// Arrivals beyond those, and all other channels, come from fresh streams
/// forked off `rng`, so repeated draws are conditionally independent given
/// the shared arrivals.
pub fn simulate_hi_coupled(
    theta: &[f64],
    shared: &[f64],
    rng: &mut StreamRng,
    settings: &EnzymeSettings,
) -> Result<Trajectory> {
    let path = UnitPoissonPath::from_prefix(shared.to_vec(), fork(rng))?;
    let mut paths = vec![None, None, None];
    paths[HI_PRODUCT_CHANNEL] = Some(path);
    let mut tr = simulate(&enzyme_hi(), theta, rng, paths, &settings.hi_stop(), false)?;
    tr.paths.clear();
    Ok(tr)
}
