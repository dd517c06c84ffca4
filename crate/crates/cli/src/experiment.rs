//! Builds the model, weighting and sampler named by a [`RunConfig`] and runs it.

use anyhow::{Context, Result};

use mf_infer::gillespie::enzyme::{PRIOR_HIGH, PRIOR_LOW};
use mf_infer::gillespie::{load_network, StopRule, Threshold};
use mf_infer::inference::{
    run_sampler, ConstantMean, CoupledSimulator, Discrete, ImportanceSampler, LogRow, MLaw,
    MultifidelityParts, MultifidelitySampler, Prior, Proposal, Schedule, Simulator,
    StopCondition, UniformBox, Weighting,
};
use mf_infer::models::{CoinModel, EnzymeModel, NetworkModel, COIN_ATOMS};
use mf_infer::schedule::{nu_star, AdaptiveConfig, AdaptiveSampler, MeanFunction, NuTracePoint};
use mf_infer::weightings::{Abc, AbcConfig, Bsl, BslConfig, PseudoMarginal};

use crate::config::{AlgorithmConfig, ModelConfig, RunConfig, WeightingConfig};

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<LogRow>,
    /// Empty unless the schedule was adaptive.
    pub trace: Vec<NuTracePoint>,
    pub mean_function: Option<MeanFunction>,
    /// Plug-in optimum of the final accumulator estimates.
    pub nu_star: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl RunOutput {
    pub fn total_cost(&self) -> f64 {
        self.rows.iter().map(LogRow::total_cost).sum()
    }
}

/// Runs `cfg` with `seed` until `stop`, overriding the configured stop rule.
pub fn execute(cfg: &RunConfig, seed: u64, stop: StopCondition, schedule: Schedule) -> Result<RunOutput> {
    let weighting = build_weighting(cfg)?;
    let replicates = cfg.weighting.replicates();
    let ctx = Runner {
        cfg,
        weighting: weighting.as_ref(),
        replicates,
        seed,
        stop,
        schedule,
    };
    match &cfg.model {
        ModelConfig::Coin {
            shift,
            cost_lo,
            cost_hi,
            proposal,
        } => {
            let model = CoinModel {
                shift: *shift,
                cost_lo: *cost_lo,
                cost_hi: *cost_hi,
            };
            let prior = CoinModel::prior();
            let atoms = COIN_ATOMS.iter().map(|&p| vec![p]).collect();
            let total: f64 = proposal.iter().sum();
            let q = Discrete::new(atoms, proposal.iter().map(|p| p / total).collect())?;
            ctx.coupled(&model, &prior, &q, &|t: &[f64]| t[0])
        }
        ModelConfig::Enzyme {
            settings,
            cost_unit,
            cost_scale,
        } => {
            let model = EnzymeModel {
                settings: *settings,
                cost_unit: *cost_unit,
                cost_scale: cost_scale.unwrap_or(cost_unit.default_scale()),
            };
            let prior = UniformBox::new(PRIOR_LOW.to_vec(), PRIOR_HIGH.to_vec())?;
            ctx.coupled(&model, &prior, &prior, &|t: &[f64]| t[2])
        }
        ModelConfig::Network {
            path,
            prior_low,
            prior_high,
            observe,
            levels,
            t_max,
            event_cap,
            cost_scale,
            target,
        } => {
            let loaded = load_network(path).with_context(|| format!("loading network {}", path.display()))?;
            let threshold = match observe {
                Some(name) => {
                    let species = loaded
                        .network
                        .species_index(name)
                        .with_context(|| format!("network has no species `{name}`"))?;
                    Some(Threshold {
                        species,
                        levels: levels.clone(),
                    })
                }
                None => None,
            };
            if prior_low.len() != loaded.network.reactions.len() {
                anyhow::bail!(
                    "prior bounds have {} entries but the network has {} reactions",
                    prior_low.len(),
                    loaded.network.reactions.len()
                );
            }
            if *target >= prior_low.len() {
                anyhow::bail!("model.target {target} is out of range");
            }
            let model = NetworkModel {
                network: loaded.network,
                stop: StopRule {
                    threshold,
                    t_max: *t_max,
                    event_cap: *event_cap,
                },
                cost_scale: *cost_scale,
            };
            let prior = UniformBox::new(prior_low.clone(), prior_high.clone())?;
            let target = *target;
            ctx.single(&model, &prior, &prior, &move |t: &[f64]| t[target])
        }
    }
}

fn build_weighting(cfg: &RunConfig) -> Result<Box<dyn Weighting>> {
    let y0 = cfg.observed();
    Ok(match cfg.weighting {
        WeightingConfig::Abc { .. } => Box::new(Abc {
            y0,
            config: AbcConfig::new(cfg.epsilon().expect("abc has a threshold"))?,
        }),
        WeightingConfig::Bsl {
            replicates,
            covariance_jitter,
        } => Box::new(Bsl {
            y0,
            config: BslConfig::new(replicates, covariance_jitter)?,
        }),
        WeightingConfig::PseudoMarginal { noise_sd, .. } => {
            let norm = (2.0 * std::f64::consts::PI).sqrt() * noise_sd;
            Box::new(PseudoMarginal {
                density: move |_theta: &[f64], x: &[f64]| {
                    if x.len() != y0.len() {
                        return 0.0;
                    }
                    x.iter()
                        .zip(&y0)
                        .map(|(xi, yi)| (-0.5 * ((yi - xi) / noise_sd).powi(2)).exp() / norm)
                        .product()
                },
            })
        }
    })
}

// Shared arguments of the model-specific runners.
struct Runner<'a> {
    cfg: &'a RunConfig,
    weighting: &'a dyn Weighting,
    replicates: usize,
    seed: u64,
    stop: StopCondition,
    schedule: Schedule,
}

type Target<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

impl Runner<'_> {
    fn single<S: Simulator>(&self, sim: &S, prior: &dyn Prior, q: &dyn Proposal, target: Target) -> Result<RunOutput> {
        let kernel = ImportanceSampler {
            prior,
            proposal: q,
            simulator: sim,
            weighting: self.weighting,
            replicates: self.replicates,
            target,
        };
        let set = run_sampler(&kernel, self.seed, self.stop, self.schedule)?;
        Ok(RunOutput {
            rows: set.samples.iter().map(LogRow::from_sample).collect(),
            trace: Vec::new(),
            mean_function: None,
            nu_star: None,
            warnings: Vec::new(),
        })
    }

    fn coupled<C>(&self, sim: &C, prior: &dyn Prior, q: &dyn Proposal, target: Target) -> Result<RunOutput>
    where
        C: Simulator + CoupledSimulator,
    {
        let parts = MultifidelityParts {
            simulator: sim,
            lo_weighting: self.weighting,
            hi_weighting: self.weighting,
            replicates: self.replicates,
        };
        match self.cfg.algorithm {
            AlgorithmConfig::Is => self.single(sim, prior, q, target),
            AlgorithmConfig::MfFixed { mu } => {
                let law: MLaw = self.cfg.m_law;
                let kernel = MultifidelitySampler {
                    prior,
                    proposal: q,
                    parts,
                    mean_fn: &ConstantMean(mu),
                    law: &law,
                    target,
                };
                let set = run_sampler(&kernel, self.seed, self.stop, self.schedule)?;
                Ok(RunOutput {
                    rows: set.samples.iter().map(LogRow::from_sample).collect(),
                    trace: Vec::new(),
                    mean_function: None,
                    nu_star: None,
                    warnings: Vec::new(),
                })
            }
            AlgorithmConfig::MfAdaptive {
                tree,
                batch,
                nu_min,
                nu_max,
                trace_every,
                ..
            } => {
                let (n0, delta) = self.cfg.adaptive_defaults();
                let mut config = AdaptiveConfig::new(n0, delta);
                config.tree = tree;
                config.law = self.cfg.m_law;
                config.batch = batch;
                config.nu_min = nu_min;
                config.nu_max = nu_max;
                config.trace_every = trace_every;
                let sampler = AdaptiveSampler {
                    prior,
                    proposal: q,
                    parts,
                    target,
                    config,
                };
                let run = sampler.run(self.seed, self.stop, self.schedule)?;
                let nu_star = run
                    .estimates
                    .as_ref()
                    .and_then(|e| nu_star(e, nu_min, nu_max).ok());
                Ok(RunOutput {
                    rows: run.samples.samples.iter().map(LogRow::from_sample).collect(),
                    trace: run.trace,
                    mean_function: Some(run.mean_function),
                    nu_star,
                    warnings: run.fit_warning.into_iter().collect(),
                })
            }
        }
    }
}
