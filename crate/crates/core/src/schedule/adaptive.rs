//! The adaptive multifidelity sampler: a burn-in with a constant mean
//! function, a CART partition fitted to the burn-in, then per-iteration
//! gradient updates of the cell values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{
    draw_parameter, run_sampler, weighted_from_record, ConstantMean, CoupledSimulator, MLaw, MeanFn,
    MultifidelityParts, MultifidelitySampler, Prior, Proposal, SampleSet, Schedule, StopCondition, TargetFn,
    WeightedSample,
};
use crate::rng::stream;

use super::accumulators::{Accumulators, ScheduleEstimates};
use super::gradient::gradient_step;
use super::mean::{features, MeanFunction, NU_MAX, NU_MIN};
use super::tree::{fit_partition, TreeParams};

/// A burn-in sample prepared for the regression:
/// `μ*_i = |Δ_i|·sqrt(Σ_j (ω_hi,ij − ω_lo,i)² / Σ_j c_hi,ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BurninRecord {
    pub features: Vec<f64>,
    pub target: f64,
    pub delta_abs: f64,
}

/// Regression records for the samples with at least one escalation and
/// positive high-fidelity cost.
pub fn burnin_records(samples: &[WeightedSample], g_bar: f64) -> Vec<BurninRecord> {
    samples
        .iter()
        .filter_map(|s| {
            let rec = s.record.as_multi()?;
            let cost = rec.cost_hi_total();
            if rec.m == 0 || !(cost > 0.0) {
                return None;
            }
            let delta_abs = ((s.g_value - g_bar) * s.draw.ratio()).abs();
            let disagreement: f64 = rec
                .hi_batches
                .iter()
                .map(|b| (b.omega - rec.omega_lo).powi(2))
                .sum();
            Some(BurninRecord {
                features: features(&s.draw.theta, &rec.y_lo_batch),
                target: delta_abs * (disagreement / cost).sqrt(),
                delta_abs,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveConfig {
    /// Burn-in length `N0`.
    pub n0: u64,
    /// Step size `δ`.
    pub delta: f64,
    #[serde(default)]
    pub tree: TreeParams,
    /// Escalation law after burn-in. Burn-in always uses Poisson with mean `burnin_mu`.
    #[serde(default)]
    pub law: MLaw,
    /// Iterations simulated between updates; those inside a batch share one mean function.
    #[serde(default = "one")]
    pub batch: usize,
    #[serde(default = "nu_min")]
    pub nu_min: f64,
    #[serde(default = "nu_max")]
    pub nu_max: f64,
    #[serde(default = "unit")]
    pub burnin_mu: f64,
    /// Keep every `trace_every`-th ν vector in the trace.
    #[serde(default = "one_u64")]
    pub trace_every: u64,
}

fn one() -> usize {
    1
}
fn one_u64() -> u64 {
    1
}
fn unit() -> f64 {
    1.0
}
fn nu_min() -> f64 {
    NU_MIN
}
fn nu_max() -> f64 {
    NU_MAX
}

impl AdaptiveConfig {
    pub fn new(n0: u64, delta: f64) -> Self {
        Self {
            n0,
            delta,
            tree: TreeParams::default(),
            law: MLaw::Poisson,
            batch: 1,
            nu_min: NU_MIN,
            nu_max: NU_MAX,
            burnin_mu: 1.0,
            trace_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 {
            return Err(Error::invalid("burn-in length must be at least 1"));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::invalid("step size must be finite and nonnegative"));
        }
        if self.batch == 0 || self.trace_every == 0 {
            return Err(Error::invalid("batch and trace_every must be at least 1"));
        }
        if !(self.nu_min > 0.0 && self.nu_min <= self.nu_max && self.nu_max.is_finite()) {
            return Err(Error::invalid("invalid ν clamp bounds"));
        }
        if !(self.burnin_mu > 0.0) {
            return Err(Error::invalid("burn-in mean must be positive"));
        }
        Ok(())
    }
}

/// ν after iteration `i` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct NuTracePoint {
    pub i: u64,
    pub nu: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    pub samples: SampleSet,
    pub burnin: usize,
    pub trace: Vec<NuTracePoint>,
    pub mean_function: MeanFunction,
    pub fit_warning: Option<String>,
    pub skipped_steps: u64,
    pub estimates: Option<ScheduleEstimates>,
}

pub struct AdaptiveSampler<'a, C: CoupledSimulator> {
    pub prior: &'a dyn Prior,
    pub proposal: &'a dyn Proposal,
    pub parts: MultifidelityParts<'a, C>,
    pub target: TargetFn<'a>,
    pub config: AdaptiveConfig,
}

impl<C: CoupledSimulator> AdaptiveSampler<'_, C> {
    fn iterate(&self, index: u64, seed: u64, mean_fn: &MeanFunction) -> Result<(WeightedSample, usize)> {
        let mut rng = stream(seed, index);
        let draw = draw_parameter(self.prior, self.proposal, &mut rng)?;
        let lo = self.parts.simulate_lo(&draw.theta, &mut rng)?;
        let x = features(&draw.theta, &lo.batch);
        let cell = mean_fn.locate(&x)?;
        let mu = mean_fn.eval(&x)?;
        let record = self.parts.escalate(&draw.theta, lo, mu, &self.config.law, &mut rng)?;
        Ok((weighted_from_record(index, draw, record, self.target)?, cell))
    }

    /// Runs burn-in then adaptation until `stop`. Iteration `i` always uses
    /// stream `(seed, i)`.
    pub fn run(&self, seed: u64, stop: StopCondition, schedule: Schedule) -> Result<AdaptiveRun> {
        let cfg = &self.config;
        cfg.validate()?;
        let burnin_law = MLaw::Poisson;
        burnin_law.validate(cfg.burnin_mu)?;
        let burnin_mean = ConstantMean(cfg.burnin_mu);
        let kernel = MultifidelitySampler {
            prior: self.prior,
            proposal: self.proposal,
            parts: self.parts,
            mean_fn: &burnin_mean as &dyn MeanFn,
            law: &burnin_law,
            target: self.target,
        };
        let burn = run_sampler(&kernel, seed, stop.capped(cfg.n0), schedule)?;
        let burnin = burn.samples.len();
        let mut samples = burn.samples;
        let dim = match samples.first() {
            Some(s) => {
                let rec = s.record.as_multi().expect("multifidelity kernel");
                features(&s.draw.theta, &rec.y_lo_batch).len()
            }
            None => 0,
        };

        let mut cost: f64 = samples.iter().map(|s| s.total_cost).sum();
        let mut next = burnin as u64;
        if (burnin as u64) < cfg.n0 || stop.should_stop(next, cost) {
            let mf = MeanFunction::new(
                super::tree::PartitionTree::single_leaf(dim),
                vec![cfg.burnin_mu],
                cfg.nu_min.min(cfg.burnin_mu),
                cfg.nu_max.max(cfg.burnin_mu),
            )?;
            return Ok(AdaptiveRun {
                samples: SampleSet { seed, samples },
                burnin,
                trace: Vec::new(),
                mean_function: mf,
                fit_warning: None,
                skipped_steps: 0,
                estimates: None,
            });
        }

        let sum_w: f64 = samples.iter().map(|s| s.weight).sum();
        let sum_wg: f64 = samples.iter().map(|s| s.weight * s.g_value).sum();
        let fit = if sum_w != 0.0 {
            let records = burnin_records(&samples, sum_wg / sum_w);
            let x: Vec<Vec<f64>> = records.iter().map(|r| r.features.clone()).collect();
            let y: Vec<f64> = records.iter().map(|r| r.target).collect();
            fit_partition(&x, &y, dim, &cfg.tree)?
        } else {
            fit_partition(&[], &[], dim, &cfg.tree)?
        };
        let fit_warning = fit
            .warning
            .map(|w| if sum_w == 0.0 { format!("burn-in weights sum to zero; {w}") } else { w });
        let tree = fit.tree;
        let mut mean_fn = MeanFunction::new(tree.clone(), vec![1.0; tree.cell_count()], cfg.nu_min, cfg.nu_max)?;

        let mut acc = Accumulators::new(tree.cell_count());
        for s in &samples {
            let rec = s.record.as_multi().expect("multifidelity kernel");
            let cell = tree.locate(&features(&s.draw.theta, &rec.y_lo_batch))?;
            acc.update(s, cell, &burnin_law)?;
        }

        let mut trace = vec![NuTracePoint {
            i: next.saturating_sub(1),
            nu: mean_fn.nu.clone(),
        }];
        let mut skipped = 0u64;
        let mut last_estimates = None;
        'outer: loop {
            if stop.should_stop(next, cost) {
                break;
            }
            let mut end = next + cfg.batch as u64;
            if let Some(cap) = stop.iteration_cap() {
                end = end.min(cap);
            }
            let frozen = &mean_fn;
            let block: Vec<Result<(WeightedSample, usize)>> = if end - next == 1 {
                vec![self.iterate(next, seed, frozen)]
            } else {
                (next..end)
                    .into_par_iter()
                    .map(|i| self.iterate(i, seed, frozen))
                    .collect()
            };
            let mut updates = Vec::with_capacity(block.len());
            for item in block {
                if stop.should_stop(next, cost) {
                    break;
                }
                let (sample, cell) = item?;
                cost += sample.total_cost;
                updates.push((sample, cell));
                next += 1;
            }
            let stopping = updates.is_empty();
            for (sample, cell) in updates {
                acc.update(&sample, cell, &cfg.law)?;
                let index = sample.index;
                samples.push(sample);
                match acc.estimates() {
                    Ok(est) => {
                        let out = gradient_step(&est, &mean_fn.nu, cfg.delta, cfg.nu_min, cfg.nu_max);
                        if out.skipped {
                            skipped += 1;
                        } else {
                            mean_fn.nu = out.nu;
                        }
                        last_estimates = Some(est);
                    }
                    Err(_) => skipped += 1,
                }
                if (index + 1) % cfg.trace_every == 0 {
                    trace.push(NuTracePoint {
                        i: index,
                        nu: mean_fn.nu.clone(),
                    });
                }
            }
            if stopping {
                break 'outer;
            }
        }
        Ok(AdaptiveRun {
            samples: SampleSet { seed, samples },
            burnin,
            trace,
            mean_function: mean_fn,
            fit_warning,
            skipped_steps: skipped,
            estimates: last_estimates,
        })
    }
}
