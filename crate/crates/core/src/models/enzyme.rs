use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gillespie::enzyme::{simulate_coupled_pair, simulate_hi, simulate_hi_coupled, EnzymeSettings, Y0};
use crate::gillespie::Trajectory;
use crate::inference::{CoupledSimulator, SimulationOutput, Simulator};
use crate::rng::StreamRng;

/// What a unit of simulation cost measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostUnit {
    /// Reaction events, scaled by `cost_scale`.
    #[default]
    Events,
    /// Wall-clock nanoseconds, scaled by `cost_scale`.
    WallNs,
}

/// The enzyme kinetics pair: uncoupled high-fidelity draws through
/// [`Simulator`], Michaelis–Menten draws with coupled corrections through
/// [`CoupledSimulator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnzymeModel {
    pub settings: EnzymeSettings,
    pub cost_unit: CostUnit,
    pub cost_scale: f64,
}

/// Nominal seconds per reaction event, at which the default step sizes adapt
/// the schedule within a few thousand iterations.
pub const DEFAULT_COST_SCALE: f64 = 1e-5;

impl CostUnit {
    /// Scale that expresses costs in nominal seconds.
    pub fn default_scale(self) -> f64 {
        match self {
            CostUnit::Events => DEFAULT_COST_SCALE,
            CostUnit::WallNs => 1e-9,
        }
    }
}

impl Default for EnzymeModel {
    fn default() -> Self {
        Self {
            settings: EnzymeSettings::default(),
            cost_unit: CostUnit::Events,
            cost_scale: DEFAULT_COST_SCALE,
        }
    }
}

impl EnzymeModel {
    pub fn observed() -> Vec<f64> {
        Y0.to_vec()
    }

    fn output(&self, tr: Trajectory) -> SimulationOutput {
        let raw = match self.cost_unit {
            CostUnit::Events => tr.summary.event_count as f64,
            CostUnit::WallNs => tr.wall_ns as f64,
        };
        SimulationOutput::new(tr.summary.y, raw * self.cost_scale)
    }
}

impl Simulator for EnzymeModel {
    fn simulate(&self, theta: &[f64], rng: &mut StreamRng) -> Result<SimulationOutput> {
        Ok(self.output(simulate_hi(theta, rng, &self.settings)?))
    }
}

impl CoupledSimulator for EnzymeModel {
    /// Product-channel arrivals realised by the low-fidelity run.
    type Coupling = Arc<Vec<f64>>;

    fn simulate_lo(&self, theta: &[f64], rng: &mut StreamRng) -> Result<(SimulationOutput, Self::Coupling)> {
        let pair = simulate_coupled_pair(theta, rng, &self.settings)?;
        Ok((self.output(pair.lo), pair.shared))
    }

    fn simulate_hi(&self, theta: &[f64], shared: &Self::Coupling, rng: &mut StreamRng) -> Result<SimulationOutput> {
        Ok(self.output(simulate_hi_coupled(theta, shared, rng, &self.settings)?))
    }
}
