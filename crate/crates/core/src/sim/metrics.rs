//! Run metrics and their accumulation.

use crate::learning::SolverReport;
use serde::Serialize;

/// Delivered-packet delay statistics (dropped packets are excluded).
#[derive(Debug, Clone, Serialize)]
pub struct DelayStats {
    pub count: u64,
    pub mean: f64,
    pub p50: f64,
    pub p95: f64,
    pub p99: f64,
}

impl DelayStats {
    pub fn from_delays(delays: &mut [u32]) -> Self {
        if delays.is_empty() {
            return Self {
                count: 0,
                mean: 0.0,
                p50: 0.0,
                p95: 0.0,
                p99: 0.0,
            };
        }
        delays.sort_unstable();
        let count = delays.len() as u64;
        let sum: u64 = delays.iter().map(|&d| d as u64).sum();
        let pct = |q: f64| -> f64 {
            let idx = ((delays.len() as f64 - 1.0) * q).round() as usize;
            delays[idx] as f64
        };
        Self {
            count,
            mean: sum as f64 / count as f64,
            p50: pct(0.50),
            p95: pct(0.95),
            p99: pct(0.99),
        }
    }
}

/// Aggregate results of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetrics {
    pub scenario: String,
    pub algorithm: String,
    pub v: f64,
    pub c: f64,
    pub seed: u64,
    pub horizon: u64,
    pub t_l: u64,
    /// Time-average admitted rate per pair.
    pub admitted_rate: Vec<f64>,
    /// Total utility of the time-average admitted rates.
    pub utility_total: f64,
    /// Time-average data queue per pair and their sum.
    pub avg_data_queue: Vec<f64>,
    pub avg_data_queue_total: f64,
    /// Time-average and maximum energy level per energy node.
    pub avg_energy: Vec<f64>,
    pub avg_energy_total: f64,
    pub max_energy: Vec<f64>,
    pub delay: DelayStats,
    pub admitted: u64,
    pub delivered: u64,
    pub dropped: u64,
    /// drops / admitted (0 when nothing was admitted).
    pub drop_rate: f64,
    pub dropped_before_t_l: u64,
    /// Number of slots where the energy positive-part clipped; must be 0.
    pub outage_count: u64,
    pub solver: Option<SolverReport>,
}
