use std::time::Instant;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::Result;
use crate::rng::StreamRng;

use super::network::ReactionNetwork;
use super::simulate::{checked_propensities, StopRule, Trajectory, TrajectorySummary, Tracker};

/// Gillespie's direct method. Same stopping semantics as [`super::simulate`];
/// kept to cross-check the next-reaction implementation.
pub fn simulate_direct(
    network: &ReactionNetwork,
    theta: &[f64],
    rng: &mut StreamRng,
    stop: &StopRule,
) -> Result<Trajectory> {
    let started = Instant::now();
    let mut state = network.initial_state.clone();
    let mut tracker = Tracker::new(network, stop);
    let mut t = 0.0;
    let mut events = 0u64;
    let mut absorbed = false;
    let mut horizon = false;
    while !tracker.reached() && events < stop.event_cap {
        let a = checked_propensities(network, &state, theta, t)?;
        let total: f64 = a.iter().sum();
        if total <= 0.0 {
            absorbed = true;
            break;
        }
        let e: f64 = rng.sample(Exp1);
        let dt = e / total;
        if t + dt > stop.t_max {
            horizon = true;
            t = stop.t_max;
            break;
        }
        t += dt;
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut fired = a.iter().rposition(|&v| v > 0.0).unwrap_or(0);
        for (k, v) in a.iter().enumerate() {
            acc += v;
            if u < acc && *v > 0.0 {
                fired = k;
                break;
            }
        }
        tracker.apply(&mut state, fired)?;
        events += 1;
        tracker.observe(&state, t);
    }
    tracker.finish();
    let completed = if stop.threshold.is_some() {
        tracker.reached()
    } else {
        absorbed || horizon
    };
    Ok(Trajectory {
        summary: TrajectorySummary {
            y: tracker.y.clone(),
            event_count: events,
            completed,
        },
        final_state: state,
        final_time: t,
        absorbed,
        wall_ns: started.elapsed().as_nanos() as u64,
        paths: Vec::new(),
        record: None,
    })
}
