//! Simulation engine and evaluation harness for a policy-prioritization
//! game: a government allocates a budget over networked development
//! indicators while the functionaries implementing each policy learn how
//! much of it they can divert.

pub mod analysis;
pub mod cluster;
pub mod data;
pub mod dynamics;
pub mod error;
pub mod fixture;
pub mod government;
pub mod model;
pub mod network;
pub mod simulation;
pub mod stats;

pub use error::{Error, Result};
pub use model::{
    validate_config, CountryConfig, CountryConfigParts, Matrix, PeriodRecord, PolicyRegime,
    Profile, RegimeKind, RunResult, SimState, ValidationReport,
};
pub use simulation::{derive_seed, run, run_seeds, sweep, RunOptions};
