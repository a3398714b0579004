//! Simulation engine, metrics, convergence measurement, and sweeps.

pub mod convergence;
pub mod engine;
pub mod metrics;
pub mod sweep;
pub mod trace;

pub use convergence::{measure_convergence, ConvergenceOptions, ConvergenceReport, SegmentTarget};
pub use engine::{run, Algorithm, DecisionProbe, RunOptions, RunOutput, Series};
pub use metrics::{DelayStats, RunMetrics};
pub use sweep::{sweep, SweepCell};
