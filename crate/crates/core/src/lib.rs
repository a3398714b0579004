//! Discrete-time simulator and algorithm library for multihop
//! energy-harvesting networks.
//!
//! The crate implements a learning-aided energy-management controller —
//! a drift-based scheduler whose queues are augmented with Lagrange
//! multipliers learned from the empirical state distribution — next to the
//! plain drift baseline, over a packet-level network simulation with
//! per-node energy storage.
//!
//! The numeric core is generic over the scalar type; the `Scalar` alias
//! (`f64`) is what the simulator, CLI, and test suites instantiate.

pub mod controller;
pub mod error;
pub mod learning;
pub mod model;
pub mod queues;
pub mod real;
pub mod sim;

pub use error::{Error, Result};
pub use real::Real;

/// Default scalar used by the binaries and test suites.
pub type Scalar = f64;

/// Convenience aliases at the default scalar.
pub type Scenario = model::Scenario<Scalar>;
pub type Multipliers = learning::Multipliers<Scalar>;
pub type AugmentationVectors = controller::AugmentationVectors<Scalar>;
pub type Snapshot = queues::Snapshot<Scalar>;
pub type RunOutput = sim::RunOutput<Scalar>;
