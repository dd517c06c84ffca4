//! Likelihood-free importance sampling: the single-fidelity sampler, the
//! multifidelity weighting and simulation step, and estimator diagnostics.

mod estimators;
mod law;
mod log;
mod model;
mod sampler;
mod types;

pub use estimators::{estimate_g, estimate_j_coefficient, estimate_mse, report};
pub use law::{CountLaw, FixedCount, MLaw};
pub use log::{LogMode, LogRow};
pub use model::{
    ConstantMean, CoupledSimulator, Discrete, MeanFn, Prior, Proposal, Simulator, UniformBox,
    Weighting,
};
pub use sampler::{
    multifidelity_weight, run_sampler, ImportanceSampler, Kernel, LowFidelityDraw,
    MultifidelityParts, MultifidelitySampler, Schedule, StopCondition, TargetFn,
};
pub(crate) use sampler::{draw_parameter, weighted_from_record};
pub use types::{
    EstimatorReport, HiBatch, MultifidelityRecord, ParameterDraw, SampleRecord, SampleSet,
    SimulationOutput, Weighted, WeightedSample,
};
