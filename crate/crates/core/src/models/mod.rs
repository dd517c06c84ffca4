//! Ready-made simulators for the bundled examples.

pub mod coin;
pub mod enzyme;
pub mod network;

pub use coin::{CoinCoupling, CoinModel, COIN_ATOMS};
pub use enzyme::{CostUnit, EnzymeModel, DEFAULT_COST_SCALE};
pub use network::NetworkModel;
