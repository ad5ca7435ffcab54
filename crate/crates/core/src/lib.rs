//! Minority game between arbitrageurs: agent-based simulator, cavity-method
//! stationary-state solver, and the measurements that reconcile the two.

pub mod cavity;
pub mod dynamics;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod market;
pub mod measures;
pub mod rng;
pub mod stats;

pub use error::{CavityError, DynamicsError, EngineError, MarketError, MeasureError};
