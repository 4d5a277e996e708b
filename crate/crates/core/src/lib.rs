//! Simulation and analysis of longest-chain consensus under private, balance and
//! tree-building attacks.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod mining;
pub mod model;
pub mod montecarlo;
pub mod rng;
pub mod strategies;
pub mod thresholds;

pub use engine::{
    format_replay, parse_replay, replay_simulation, run_simulation, Model, SimulationConfig, Trace,
};
pub use error::{Error, Result};
pub use mining::{sample_poisson_schedule, EventClass, MiningEvent, MiningSchedule, Rates};
pub use model::{AncestryIndex, Block, BlockId, Blocktree, MinerClass, GENESIS};
pub use strategies::StrategySpec;
