//! Run configuration (TOML).
//!
//! ```toml
//! schema_version = 1
//! seed = 7
//!
//! [model]
//! kind = "enzyme"
//!
//! [weighting]
//! kind = "abc"
//! epsilon = 5.0
//!
//! [algorithm]
//! kind = "mf-adaptive"
//!
//! [stop]
//! iterations = 20000
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mf_infer::gillespie::enzyme::{EnzymeSettings, Y0};
use mf_infer::inference::{MLaw, StopCondition};
use mf_infer::models::CostUnit;
use mf_infer::schedule::TreeParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub model: ModelConfig,
    pub weighting: WeightingConfig,
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub m_law: MLaw,
    pub stop: StopConfig,
    /// Observed data; defaults to the enzyme threshold times for the enzyme model.
    #[serde(default)]
    pub y0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    Coin {
        #[serde(default = "coin_shift")]
        shift: f64,
        #[serde(default = "unit")]
        cost_lo: f64,
        #[serde(default = "ten")]
        cost_hi: f64,
        /// Proposal masses on p = 0.25 and p = 0.75.
        #[serde(default = "halves")]
        proposal: [f64; 2],
    },
    Enzyme {
        #[serde(default)]
        settings: EnzymeSettings,
        #[serde(default)]
        cost_unit: CostUnit,
        /// Defaults to 1e-5 per event or 1e-9 per nanosecond.
        #[serde(default)]
        cost_scale: Option<f64>,
    },
    Network {
        path: PathBuf,
        prior_low: Vec<f64>,
        prior_high: Vec<f64>,
        /// Species observed through threshold crossing times; the final state
        /// is observed when absent.
        #[serde(default)]
        observe: Option<String>,
        #[serde(default)]
        levels: Vec<i64>,
        #[serde(default = "t_max")]
        t_max: f64,
        #[serde(default = "event_cap")]
        event_cap: u64,
        #[serde(default = "unit")]
        cost_scale: f64,
        /// Index of the rate whose posterior mean is estimated.
        #[serde(default)]
        target: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightingConfig {
    Abc {
        /// Defaults to 5 for the enzyme and network models, 0.5 for the coin.
        #[serde(default)]
        epsilon: Option<f64>,
        #[serde(default = "one")]
        replicates: usize,
    },
    Bsl {
        #[serde(default = "hundred")]
        replicates: usize,
        #[serde(default = "jitter")]
        covariance_jitter: f64,
    },
    /// Gaussian observation noise around each latent simulation.
    PseudoMarginal {
        noise_sd: f64,
        #[serde(default = "one")]
        replicates: usize,
    },
}

impl WeightingConfig {
    pub fn replicates(&self) -> usize {
        match *self {
            WeightingConfig::Abc { replicates, .. }
            | WeightingConfig::Bsl { replicates, .. }
            | WeightingConfig::PseudoMarginal { replicates, .. } => replicates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlgorithmConfig {
    Is,
    MfFixed {
        #[serde(default = "unit")]
        mu: f64,
    },
    MfAdaptive {
        /// Defaults to 10⁴ for ABC and 2000 for BSL.
        #[serde(default)]
        n0: Option<u64>,
        /// Defaults to 10³ for ABC and 10⁸ for BSL.
        #[serde(default)]
        delta: Option<f64>,
        #[serde(default)]
        tree: TreeParams,
        #[serde(default = "one")]
        batch: usize,
        #[serde(default = "nu_min")]
        nu_min: f64,
        #[serde(default = "nu_max")]
        nu_max: f64,
        #[serde(default = "one_u64")]
        trace_every: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopConfig {
    #[serde(default)]
    pub iterations: Option<u64>,
    #[serde(default)]
    pub cost: Option<f64>,
}

impl StopConfig {
    pub fn condition(&self) -> Result<StopCondition> {
        match (self.iterations, self.cost) {
            (Some(n), None) => Ok(StopCondition::Iterations(n)),
            (None, Some(c)) => Ok(StopCondition::CostBudget(c)),
            (Some(iterations), Some(cost)) => Ok(StopCondition::Either { iterations, cost }),
            (None, None) => bail!("[stop] needs `iterations`, `cost`, or both"),
        }
    }
}

fn coin_shift() -> f64 {
    0.1
}
fn unit() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn halves() -> [f64; 2] {
    [0.5, 0.5]
}
fn one() -> usize {
    1
}
fn one_u64() -> u64 {
    1
}
fn hundred() -> usize {
    100
}
fn jitter() -> f64 {
    1e-8
}
fn t_max() -> f64 {
    1e3
}
fn event_cap() -> u64 {
    1_000_000
}
fn nu_min() -> f64 {
    mf_infer::schedule::NU_MIN
}
fn nu_max() -> f64 {
    mf_infer::schedule::NU_MAX
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| anyhow::anyhow!("invalid config: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        // network files are located relative to the config
        if let ModelConfig::Network { path: net, .. } = &mut cfg.model {
            if net.is_relative() {
                if let Some(dir) = path.parent() {
                    *net = dir.join(&*net);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        self.stop.condition()?;
        if self.weighting.replicates() == 0 {
            bail!("weighting.replicates must be at least 1");
        }
        match &self.weighting {
            WeightingConfig::Abc { epsilon: Some(e), .. } if !(*e > 0.0) => {
                bail!("weighting.epsilon must be positive")
            }
            WeightingConfig::Bsl { replicates, .. } if *replicates < 2 => {
                bail!("weighting.replicates must be at least 2 for bsl")
            }
            WeightingConfig::PseudoMarginal { noise_sd, .. } if !(*noise_sd > 0.0) => {
                bail!("weighting.noise_sd must be positive")
            }
            _ => {}
        }
        if let ModelConfig::Network { .. } = self.model {
            if !matches!(self.algorithm, AlgorithmConfig::Is) {
                bail!("network models support only algorithm.kind = \"is\"");
            }
        }
        if let ModelConfig::Coin { proposal, .. } = self.model {
            if proposal.iter().any(|p| !(*p > 0.0)) {
                bail!("model.proposal masses must be positive");
            }
        }
        match self.algorithm {
            AlgorithmConfig::MfFixed { mu } => self.m_law.validate(mu)?,
            AlgorithmConfig::MfAdaptive { batch, trace_every, .. } => {
                if batch == 0 || trace_every == 0 {
                    bail!("algorithm.batch and algorithm.trace_every must be at least 1");
                }
                let (n0, delta) = self.adaptive_defaults();
                if n0 == 0 || !(delta >= 0.0) {
                    bail!("algorithm.n0 must be positive and algorithm.delta nonnegative");
                }
            }
            AlgorithmConfig::Is => {}
        }
        Ok(())
    }

    /// Settings that are valid but probably unintended.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let AlgorithmConfig::MfAdaptive { .. } = self.algorithm {
            let (n0, _) = self.adaptive_defaults();
            if let Some(n) = self.stop.iterations {
                if n <= n0 {
                    out.push(format!(
                        "stop.iterations = {n} does not exceed the burn-in length {n0}; the schedule will not adapt"
                    ));
                }
            }
        }
        if let (WeightingConfig::Abc { replicates, .. }, ModelConfig::Coin { .. }) = (&self.weighting, &self.model) {
            if *replicates > 1 {
                out.push("coin ABC weights with several replicates are fractions, not indicators".into());
            }
        }
        if let Some(y0) = &self.y0 {
            if matches!(self.model, ModelConfig::Enzyme { .. }) && y0.len() != Y0.len() {
                out.push(format!(
                    "y0 has {} entries but the enzyme summary has {}; every weight will be zero",
                    y0.len(),
                    Y0.len()
                ));
            }
        }
        out
    }

    /// Burn-in length and step size, filled in from the weighting when unset.
    pub fn adaptive_defaults(&self) -> (u64, f64) {
        let (n0_default, delta_default) = match self.weighting {
            WeightingConfig::Bsl { .. } => (2000, 1e8),
            _ => (10_000, 1e3),
        };
        match self.algorithm {
            AlgorithmConfig::MfAdaptive { n0, delta, .. } => {
                (n0.unwrap_or(n0_default), delta.unwrap_or(delta_default))
            }
            _ => (n0_default, delta_default),
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self.weighting {
            WeightingConfig::Abc { epsilon, .. } => Some(epsilon.unwrap_or(match self.model {
                ModelConfig::Coin { .. } => 0.5,
                _ => 5.0,
            })),
            _ => None,
        }
    }

    pub fn observed(&self) -> Vec<f64> {
        match (&self.y0, &self.model) {
            (Some(y), _) => y.clone(),
            (None, ModelConfig::Coin { .. }) => vec![1.0],
            (None, _) => Y0.to_vec(),
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form, leaving
    /// out the output directory.
    pub fn hash(&self) -> String {
        let canonical = RunConfig { out: None, ..self.clone() };
        let json = serde_json::to_string(&canonical).expect("config serialises");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}
