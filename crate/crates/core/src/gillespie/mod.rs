//! Exact stochastic simulation of reaction networks.

mod direct;
pub mod enzyme;
mod file;
mod network;
mod path;
mod simulate;

pub use direct::simulate_direct;
pub use file::{load_network, parse_network, LoadedNetwork};
pub use network::{mass_action, mass_action_factor, Propensity, Reaction, ReactionNetwork};
pub use path::UnitPoissonPath;
pub use simulate::{conservation_checks, simulate, StopRule, Threshold, Trajectory, TrajectorySummary};
