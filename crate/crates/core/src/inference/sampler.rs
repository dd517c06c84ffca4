//! Likelihood-free importance sampling, single- and multi-fidelity.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inference::law::CountLaw;
use crate::inference::model::{CoupledSimulator, MeanFn, Prior, Proposal, Simulator, Weighting};
use crate::inference::types::{
    check_positive_mu, HiBatch, MultifidelityRecord, ParameterDraw, SampleRecord, SampleSet,
    SimulationOutput, WeightedSample,
};
use crate::rng::{stream, StreamRng};

/// Target function `G(θ)` whose posterior mean is estimated.
pub type TargetFn<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// When to stop a run. Checked before every iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopCondition {
    Iterations(u64),
    CostBudget(f64),
    /// Whichever comes first.
    Either { iterations: u64, cost: f64 },
}

impl StopCondition {
    pub fn should_stop(&self, completed: u64, elapsed_cost: f64) -> bool {
        match *self {
            StopCondition::Iterations(n) => completed >= n,
            StopCondition::CostBudget(c) => elapsed_cost >= c,
            StopCondition::Either { iterations, cost } => {
                completed >= iterations || elapsed_cost >= cost
            }
        }
    }

    pub fn iteration_cap(&self) -> Option<u64> {
        match *self {
            StopCondition::Iterations(n) | StopCondition::Either { iterations: n, .. } => Some(n),
            StopCondition::CostBudget(_) => None,
        }
    }

    pub fn cost_cap(&self) -> Option<f64> {
        match *self {
            StopCondition::CostBudget(c) | StopCondition::Either { cost: c, .. } => Some(c),
            StopCondition::Iterations(_) => None,
        }
    }

    /// The earlier of `self` and `iterations` more iterations.
    pub fn capped(&self, iterations: u64) -> StopCondition {
        let n = self.iteration_cap().map_or(iterations, |c| c.min(iterations));
        match self.cost_cap() {
            Some(cost) => StopCondition::Either { iterations: n, cost },
            None => StopCondition::Iterations(n),
        }
    }
}

/// How iterations of a frozen kernel are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Serial,
    /// Evaluate blocks of `chunk` iterations concurrently.
    Parallel { chunk: usize },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Parallel { chunk: 512 }
    }
}

/// One sampler iteration as a function of its index and private stream.
pub trait Kernel: Sync {
    fn iterate(&self, index: u64, rng: &mut StreamRng) -> Result<WeightedSample>;
}

pub(crate) fn draw_parameter(
    prior: &dyn Prior,
    proposal: &dyn Proposal,
    rng: &mut StreamRng,
) -> Result<ParameterDraw> {
    let theta = proposal.sample(rng);
    let proposal_density = proposal.density(&theta);
    if !(proposal_density > 0.0) {
        return Err(Error::ZeroProposalDensity(theta));
    }
    let prior_density = prior.density(&theta);
    Ok(ParameterDraw {
        theta,
        prior_density,
        proposal_density,
    })
}

/// The multifidelity weighting `ω_lo + (1/μ) Σ (ω_hi,i − ω_lo)`.
pub fn multifidelity_weight(omega_lo: f64, mu: f64, omega_hi_values: &[f64]) -> Result<f64> {
    check_positive_mu(mu)?;
    let correction: f64 = omega_hi_values.iter().map(|w| w - omega_lo).sum();
    Ok(omega_lo + correction / mu)
}

/// Everything an iteration of Alg.-1-style sampling needs.
pub struct ImportanceSampler<'a, S: Simulator> {
    pub prior: &'a dyn Prior,
    pub proposal: &'a dyn Proposal,
    pub simulator: &'a S,
    pub weighting: &'a dyn Weighting,
    pub replicates: usize,
    pub target: TargetFn<'a>,
}

impl<S: Simulator> ImportanceSampler<'_, S> {
    /// Draw `θ ~ q`, simulate `K` replicates and weight them.
    pub fn single_fidelity_iteration(
        &self,
        index: u64,
        rng: &mut StreamRng,
    ) -> Result<WeightedSample> {
        if self.replicates == 0 {
            return Err(Error::invalid("at least one replicate is required"));
        }
        let draw = draw_parameter(self.prior, self.proposal, rng)?;
        let batch = (0..self.replicates)
            .map(|_| self.simulator.simulate(&draw.theta, rng))
            .collect::<Result<Vec<_>>>()?;
        let omega = self.weighting.weight(&draw.theta, &batch)?;
        let weight = draw.ratio() * omega;
        let g_value = (self.target)(&draw.theta);
        let record = SampleRecord::Single { batch, omega };
        let total_cost = record.total_cost();
        Ok(WeightedSample {
            index,
            draw,
            weight,
            record,
            g_value,
            total_cost,
        })
    }
}

impl<S: Simulator> Kernel for ImportanceSampler<'_, S> {
    fn iterate(&self, index: u64, rng: &mut StreamRng) -> Result<WeightedSample> {
        self.single_fidelity_iteration(index, rng)
    }
}

/// The model side of a multifidelity iteration.
pub struct MultifidelityParts<'a, C: CoupledSimulator> {
    pub simulator: &'a C,
    pub lo_weighting: &'a dyn Weighting,
    pub hi_weighting: &'a dyn Weighting,
    pub replicates: usize,
}

impl<C: CoupledSimulator> Clone for MultifidelityParts<'_, C> {
    fn clone(&self) -> Self {
        *self
    }
}
impl<C: CoupledSimulator> Copy for MultifidelityParts<'_, C> {}

/// Low-fidelity batch with its couplings, before any escalation.
pub struct LowFidelityDraw<K> {
    pub batch: Vec<SimulationOutput>,
    pub couplings: Vec<K>,
    pub omega_lo: f64,
}

impl<'a, C: CoupledSimulator> MultifidelityParts<'a, C> {
    pub fn simulate_lo(
        &self,
        theta: &[f64],
        rng: &mut StreamRng,
    ) -> Result<LowFidelityDraw<C::Coupling>> {
        if self.replicates == 0 {
            return Err(Error::invalid("at least one replicate is required"));
        }
        let (batch, couplings): (Vec<_>, Vec<_>) = (0..self.replicates)
            .map(|_| self.simulator.simulate_lo(theta, rng))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        let omega_lo = self.lo_weighting.weight(theta, &batch)?;
        Ok(LowFidelityDraw {
            batch,
            couplings,
            omega_lo,
        })
    }

    /// Escalate a low-fidelity draw with `m ~ law(μ)` coupled high-fidelity batches.
    pub fn escalate(
        &self,
        theta: &[f64],
        lo: LowFidelityDraw<C::Coupling>,
        mu: f64,
        law: &dyn CountLaw,
        rng: &mut StreamRng,
    ) -> Result<MultifidelityRecord> {
        check_positive_mu(mu)?;
        let m = law.sample(mu, rng)?;
        let mut hi_batches = Vec::with_capacity(m as usize);
        for _ in 0..m {
            let outputs = lo
                .couplings
                .iter()
                .map(|c| self.simulator.simulate_hi(theta, c, rng))
                .collect::<Result<Vec<_>>>()?;
            let omega = self.hi_weighting.weight(theta, &outputs)?;
            hi_batches.push(HiBatch { outputs, omega });
        }
        Ok(MultifidelityRecord {
            y_lo_batch: lo.batch,
            omega_lo: lo.omega_lo,
            mu,
            m,
            hi_batches,
        })
    }

    /// `MF-Simulate`: low-fidelity batch, escalation count, coupled corrections.
    pub fn mf_simulate(
        &self,
        theta: &[f64],
        mean_fn: &dyn MeanFn,
        law: &dyn CountLaw,
        rng: &mut StreamRng,
    ) -> Result<MultifidelityRecord> {
        let lo = self.simulate_lo(theta, rng)?;
        let mu = mean_fn.mean(theta, &lo.batch)?;
        self.escalate(theta, lo, mu, law, rng)
    }
}

pub(crate) fn weighted_from_record(
    index: u64,
    draw: ParameterDraw,
    record: MultifidelityRecord,
    target: TargetFn<'_>,
) -> Result<WeightedSample> {
    let omega = record.omega_mf()?;
    let weight = draw.ratio() * omega;
    let g_value = target(&draw.theta);
    let total_cost = record.total_cost();
    Ok(WeightedSample {
        index,
        draw,
        weight,
        record: SampleRecord::Multi(record),
        g_value,
        total_cost,
    })
}

/// Multifidelity importance sampling with a fixed mean function.
pub struct MultifidelitySampler<'a, C: CoupledSimulator> {
    pub prior: &'a dyn Prior,
    pub proposal: &'a dyn Proposal,
    pub parts: MultifidelityParts<'a, C>,
    pub mean_fn: &'a dyn MeanFn,
    pub law: &'a dyn CountLaw,
    pub target: TargetFn<'a>,
}

impl<C: CoupledSimulator> Kernel for MultifidelitySampler<'_, C> {
    fn iterate(&self, index: u64, rng: &mut StreamRng) -> Result<WeightedSample> {
        let draw = draw_parameter(self.prior, self.proposal, rng)?;
        let record = self
            .parts
            .mf_simulate(&draw.theta, self.mean_fn, self.law, rng)?;
        weighted_from_record(index, draw, record, self.target)
    }
}

/// Runs `kernel` from iteration 0 until `stop` holds. Iteration `i` draws from
/// stream `(seed, i)`, so serial and parallel schedules agree exactly.
pub fn run_sampler(
    kernel: &dyn Kernel,
    seed: u64,
    stop: StopCondition,
    schedule: Schedule,
) -> Result<SampleSet> {
    let mut samples = Vec::new();
    let mut cost = 0.0;
    let mut next: u64 = 0;
    let chunk = match schedule {
        Schedule::Serial => 1,
        Schedule::Parallel { chunk } => chunk.max(1) as u64,
    };
    'outer: loop {
        if stop.should_stop(next, cost) {
            break;
        }
        let mut end = next + chunk;
        if let Some(cap) = stop.iteration_cap() {
            end = end.min(cap);
        }
        let block: Vec<Result<WeightedSample>> = if chunk == 1 {
            vec![kernel.iterate(next, &mut stream(seed, next))]
        } else {
            (next..end)
                .into_par_iter()
                .map(|i| kernel.iterate(i, &mut stream(seed, i)))
                .collect()
        };
        for sample in block {
            if stop.should_stop(next, cost) {
                break 'outer;
            }
            let sample = sample?;
            cost += sample.total_cost;
            samples.push(sample);
            next += 1;
        }
    }
    Ok(SampleSet { seed, samples })
}
