//! Balls-into-bins allocation under explicit memory budgets.
//!
//! [`sim`] runs the process, [`policies`] holds the placement rules with
//! their bit budgets, [`analysis`] reconstructs placement probabilities and
//! phase statistics, and [`experiment`] drives seeded scans.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod policies;
pub mod rng;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
pub use policies::{memory_bits, Policy};
pub use sim::{load_histogram, max_load, simulate_run, BinLoads, RunResult, SimConfig, StepRecord};
