use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::rng::{fork, StreamRng};

use super::network::{dot, ReactionNetwork};
use super::path::UnitPoissonPath;

static CONSERVATION_CHECKS: AtomicU64 = AtomicU64::new(0);

/// Number of per-event conservation checks performed by this process.
pub fn conservation_checks() -> u64 {
    CONSERVATION_CHECKS.load(Ordering::Relaxed)
}

/// Records the first time `state[species]` reaches each level.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub species: usize,
    pub levels: Vec<i64>,
}

/// When to stop a trajectory. With a threshold, the run is complete once the
/// last level is reached; without one, once it is absorbed or hits `t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct StopRule {
    pub threshold: Option<Threshold>,
    pub t_max: f64,
    pub event_cap: u64,
}

impl StopRule {
    pub fn horizon(t_max: f64, event_cap: u64) -> Self {
        Self {
            threshold: None,
            t_max,
            event_cap,
        }
    }

    fn validate(&self, network: &ReactionNetwork) -> Result<()> {
        if !(self.t_max > 0.0) {
            return Err(Error::invalid("t_max must be positive"));
        }
        if let Some(th) = &self.threshold {
            if th.species >= network.species.len() {
                return Err(Error::invalid("threshold species out of range"));
            }
            if th.levels.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::invalid("threshold levels must be nondecreasing"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySummary {
    /// Threshold crossing times; unreached levels are clamped to `t_max`.
    pub y: Vec<f64>,
    pub event_count: u64,
    pub completed: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub summary: TrajectorySummary,
    pub final_state: Vec<i64>,
    /// Time of the last event, or `t_max` if the horizon was reached.
    pub final_time: f64,
    pub absorbed: bool,
    pub wall_ns: u64,
    /// Paths as left after the run, one per channel.
    pub paths: Vec<UnitPoissonPath>,
    /// `(time, state)` after every event, when requested.
    pub record: Option<Vec<(f64, Vec<i64>)>>,
}

pub(crate) struct Tracker<'a> {
    network: &'a ReactionNetwork,
    stop: &'a StopRule,
    conserved: Vec<i64>,
    pub(crate) y: Vec<f64>,
    next_level: usize,
    checks: u64,
}

impl<'a> Tracker<'a> {
    pub(crate) fn new(network: &'a ReactionNetwork, stop: &'a StopRule) -> Self {
        let conserved = network
            .conservation
            .iter()
            .map(|w| dot(w, &network.initial_state))
            .collect();
        let levels = stop.threshold.as_ref().map_or(0, |t| t.levels.len());
        let mut tracker = Self {
            network,
            stop,
            conserved,
            y: vec![stop.t_max; levels],
            next_level: 0,
            checks: 0,
        };
        tracker.observe(&network.initial_state, 0.0);
        tracker
    }

    pub(crate) fn observe(&mut self, state: &[i64], t: f64) {
        if let Some(th) = &self.stop.threshold {
            while self.next_level < th.levels.len() && state[th.species] >= th.levels[self.next_level] {
                self.y[self.next_level] = t;
                self.next_level += 1;
            }
        }
    }

    pub(crate) fn reached(&self) -> bool {
        self.stop
            .threshold
            .as_ref()
            .is_some_and(|th| self.next_level == th.levels.len())
    }

    pub(crate) fn apply(&mut self, state: &mut [i64], reaction: usize) -> Result<()> {
        let r = &self.network.reactions[reaction];
        for (x, d) in state.iter_mut().zip(&r.change) {
            *x += d;
        }
        if state.iter().any(|&x| x < 0) {
            return Err(Error::invalid(format!(
                "reaction {} fired with positive propensity but left a negative count",
                r.name
            )));
        }
        for (w, c) in self.network.conservation.iter().zip(&self.conserved) {
            assert_eq!(dot(w, state), *c, "conservation law violated by {}", r.name);
            self.checks += 1;
        }
        Ok(())
    }

    pub(crate) fn finish(&self) {
        CONSERVATION_CHECKS.fetch_add(self.checks, Ordering::Relaxed);
    }
}

pub(crate) fn checked_propensities(
    network: &ReactionNetwork,
    state: &[i64],
    theta: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    let a = network.propensities(state, theta, t);
    if let Some(bad) = a.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::invalid(format!(
            "propensity of {} is {} at state {:?}",
            network.reactions[bad].name, a[bad], state
        )));
    }
    Ok(a)
}

/// Exact simulation by the next-reaction (random time-change) method.
///
/// Channel `k` fires when its integrated propensity reaches the next arrival
/// of its unit-rate path. Supplied paths are used for the channels they are
/// given for; the rest get fresh paths forked from `rng` in channel order.
pub fn simulate(
    network: &ReactionNetwork,
    theta: &[f64],
    rng: &mut StreamRng,
    paths: Vec<Option<UnitPoissonPath>>,
    stop: &StopRule,
    record: bool,
) -> Result<Trajectory> {
    let started = Instant::now();
    let r = network.reactions.len();
    if !paths.is_empty() && paths.len() != r {
        return Err(Error::DimensionMismatch {
            expected: r,
            got: paths.len(),
        });
    }
    stop.validate(network)?;
    let mut paths: Vec<UnitPoissonPath> = if paths.is_empty() {
        (0..r).map(|_| UnitPoissonPath::new(fork(rng))).collect()
    } else {
        paths
            .into_iter()
            .map(|p| p.unwrap_or_else(|| UnitPoissonPath::new(fork(rng))))
            .collect()
    };

    let mut state = network.initial_state.clone();
    let mut tracker = Tracker::new(network, stop);
    let mut cursor = vec![0usize; r];
    let mut next: Vec<f64> = paths.iter_mut().map(|p| p.arrival(0)).collect();
    let mut internal = vec![0.0; r];
    let mut t = 0.0;
    let mut events = 0u64;
    let mut absorbed = false;
    let mut horizon = false;
    let mut trace = record.then(Vec::new);

    while !tracker.reached() {
        if events >= stop.event_cap {
            break;
        }
        let a = checked_propensities(network, &state, theta, t)?;
        let mut best: Option<(usize, f64)> = None;
        for k in 0..r {
            if a[k] > 0.0 {
                let dt = (next[k] - internal[k]) / a[k];
                if best.is_none_or(|(_, b)| dt < b) {
                    best = Some((k, dt));
                }
            }
        }
        let Some((fired, dt)) = best else {
            absorbed = true;
            break;
        };
        if t + dt > stop.t_max {
            horizon = true;
            t = stop.t_max;
            break;
        }
        t += dt;
        for k in 0..r {
            internal[k] += a[k] * dt;
        }
        internal[fired] = next[fired];
        cursor[fired] += 1;
        next[fired] = paths[fired].arrival(cursor[fired]);
        tracker.apply(&mut state, fired)?;
        events += 1;
        tracker.observe(&state, t);
        if let Some(tr) = trace.as_mut() {
            tr.push((t, state.clone()));
        }
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
        paths,
        record: trace,
    })
}
