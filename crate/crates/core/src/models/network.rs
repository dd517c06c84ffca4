use crate::error::Result;
use crate::gillespie::{simulate, ReactionNetwork, StopRule};
use crate::inference::{SimulationOutput, Simulator};
use crate::rng::StreamRng;

/// A reaction network observed through its stop rule: threshold crossing
/// times when the rule has a threshold, the final state otherwise. Cost is
/// the event count times `cost_scale`.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    pub network: ReactionNetwork,
    pub stop: StopRule,
    pub cost_scale: f64,
}

impl Simulator for NetworkModel {
    fn simulate(&self, theta: &[f64], rng: &mut StreamRng) -> Result<SimulationOutput> {
        let tr = simulate(&self.network, theta, rng, vec![], &self.stop, false)?;
        let y = if self.stop.threshold.is_some() {
            tr.summary.y
        } else {
            tr.final_state.iter().map(|&x| x as f64).collect()
        };
        Ok(SimulationOutput::new(y, tr.summary.event_count as f64 * self.cost_scale))
    }
}
