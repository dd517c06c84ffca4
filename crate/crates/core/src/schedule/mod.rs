//! Adaptive escalation schedules: partitions, piecewise-constant mean
//! functions, running cost/variance estimates and the descent on `log ν`.

mod accumulators;
mod adaptive;
mod gradient;
mod mean;
mod tree;

pub use accumulators::{Accumulators, ScheduleEstimates};
pub use adaptive::{burnin_records, AdaptiveConfig, AdaptiveRun, AdaptiveSampler, BurninRecord, NuTracePoint};
pub use gradient::{gradient, gradient_step, nu_star, StepOutcome};
pub use mean::{features, MeanFunction, NU_MAX, NU_MIN};
pub use tree::{fit_partition, Node, PartitionTree, TreeFit, TreeParams};
