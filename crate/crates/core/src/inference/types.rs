use crate::error::{Error, Result};

/// One parameter proposal together with the prior and proposal densities at it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterDraw {
    pub theta: Vec<f64>,
    pub prior_density: f64,
    pub proposal_density: f64,
}

impl ParameterDraw {
    /// Importance ratio `prior / proposal`.
    pub fn ratio(&self) -> f64 {
        self.prior_density / self.proposal_density
    }
}

/// A single simulated dataset and what it cost to produce.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub y: Vec<f64>,
    pub cost: f64,
}

impl SimulationOutput {
    pub fn new(y: Vec<f64>, cost: f64) -> Self {
        Self { y, cost }
    }
}

pub(crate) fn batch_cost(batch: &[SimulationOutput]) -> f64 {
    batch.iter().map(|s| s.cost).sum()
}

/// One coupled high-fidelity batch and its weighting value.
#[derive(Debug, Clone, PartialEq)]
pub struct HiBatch {
    pub outputs: Vec<SimulationOutput>,
    pub omega: f64,
}

impl HiBatch {
    pub fn cost(&self) -> f64 {
        batch_cost(&self.outputs)
    }
}

/// Low-fidelity batch, drawn escalation count and the high-fidelity corrections
/// simulated in one multifidelity iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MultifidelityRecord {
    pub y_lo_batch: Vec<SimulationOutput>,
    pub omega_lo: f64,
    pub mu: f64,
    pub m: u64,
    pub hi_batches: Vec<HiBatch>,
}

impl MultifidelityRecord {
    pub fn cost_lo(&self) -> f64 {
        batch_cost(&self.y_lo_batch)
    }

    pub fn cost_hi_total(&self) -> f64 {
        self.hi_batches.iter().map(HiBatch::cost).sum()
    }

    pub fn total_cost(&self) -> f64 {
        self.cost_lo() + self.cost_hi_total()
    }

    pub fn omega_hi_values(&self) -> Vec<f64> {
        self.hi_batches.iter().map(|b| b.omega).collect()
    }

    /// The corrected weighting value for this record.
    pub fn omega_mf(&self) -> Result<f64> {
        super::multifidelity_weight(self.omega_lo, self.mu, &self.omega_hi_values())
    }
}

/// Simulation bookkeeping behind a weighted sample.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleRecord {
    Single {
        batch: Vec<SimulationOutput>,
        omega: f64,
    },
    Multi(MultifidelityRecord),
}

impl SampleRecord {
    pub fn total_cost(&self) -> f64 {
        match self {
            SampleRecord::Single { batch, .. } => batch_cost(batch),
            SampleRecord::Multi(r) => r.total_cost(),
        }
    }

    pub fn as_multi(&self) -> Option<&MultifidelityRecord> {
        match self {
            SampleRecord::Multi(r) => Some(r),
            SampleRecord::Single { .. } => None,
        }
    }
}

/// The output of one sampler iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    pub index: u64,
    pub draw: ParameterDraw,
    /// May be negative for multifidelity weights; never clipped.
    pub weight: f64,
    pub record: SampleRecord,
    pub g_value: f64,
    pub total_cost: f64,
}

/// Anything carrying a weight, a target value and a cost.
pub trait Weighted {
    fn weight(&self) -> f64;
    fn g_value(&self) -> f64;
    fn cost(&self) -> f64;
}

impl Weighted for WeightedSample {
    fn weight(&self) -> f64 {
        self.weight
    }
    fn g_value(&self) -> f64 {
        self.g_value
    }
    fn cost(&self) -> f64 {
        self.total_cost
    }
}

impl Weighted for (f64, f64, f64) {
    fn weight(&self) -> f64 {
        self.0
    }
    fn g_value(&self) -> f64 {
        self.1
    }
    fn cost(&self) -> f64 {
        self.2
    }
}

/// All samples of a run plus the seed that reproduces them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub seed: u64,
    pub samples: Vec<WeightedSample>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total_cost(&self) -> f64 {
        self.samples.iter().map(|s| s.total_cost).sum()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.weight).collect()
    }
}

/// Summary statistics of a weighted sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorReport {
    pub g_hat: f64,
    pub mean_weight: f64,
    pub variance_estimate: f64,
    pub j_coefficient: f64,
    pub n: usize,
    pub total_cost: f64,
}

pub(crate) fn check_positive_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("mean escalation rate must be positive, got {mu}")))
    }
}
