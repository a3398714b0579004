//! Cross-product experiment runner.

use crate::error::Result;
use crate::model::Scenario;
use crate::real::Real;
use crate::sim::engine::{run, Algorithm, RunOptions};
use crate::sim::metrics::RunMetrics;
use rayon::prelude::*;
use serde::Serialize;

/// Aggregated results of one (V, algorithm) cell.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub v: f64,
    pub algorithm: String,
    pub runs: Vec<RunMetrics>,
    pub utility_mean: f64,
    pub utility_std: f64,
    pub avg_data_queue_mean: f64,
    pub avg_energy_mean: f64,
    pub delay_mean: f64,
    pub delay_p99_mean: f64,
    pub drops_total: u64,
    pub outages_total: u64,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl SweepCell {
    fn from_runs(v: f64, algorithm: &str, runs: Vec<RunMetrics>) -> Self {
        let (utility_mean, utility_std) = mean_std(runs.iter().map(|m| m.utility_total));
        let (queue_mean, _) = mean_std(runs.iter().map(|m| m.avg_data_queue_total));
        let (energy_mean, _) = mean_std(runs.iter().map(|m| m.avg_energy_total));
        let (delay_mean, _) = mean_std(runs.iter().map(|m| m.delay.mean));
        let (p99_mean, _) = mean_std(runs.iter().map(|m| m.delay.p99));
        let drops_total = runs.iter().map(|m| m.dropped).sum();
        let outages_total = runs.iter().map(|m| m.outage_count).sum();
        Self {
            v,
            algorithm: algorithm.to_string(),
            runs,
            utility_mean,
            utility_std,
            avg_data_queue_mean: queue_mean,
            avg_energy_mean: energy_mean,
            delay_mean,
            delay_p99_mean: p99_mean,
            drops_total,
            outages_total,
        }
    }
}

/// Runs every (V, algorithm, seed) combination, cells in parallel, and
/// aggregates per-cell means over seeds. `make` builds the scenario for a
/// given V and seed.
pub fn sweep<S, F>(
    v_list: &[f64],
    algorithms: &[Algorithm],
    seeds: &[u64],
    make: F,
) -> Result<Vec<SweepCell>>
where
    S: Real,
    F: Fn(f64, u64) -> Result<Scenario<S>> + Sync,
{
    let cells: Vec<(f64, Algorithm)> = v_list
        .iter()
        .flat_map(|&v| algorithms.iter().map(move |&a| (v, a)))
        .collect();
    cells
        .into_par_iter()
        .map(|(v, algo)| {
            let runs = seeds
                .par_iter()
                .map(|&seed| {
                    let scenario = make(v, seed)?;
                    Ok(run(&scenario, algo, &RunOptions::default())?.metrics)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepCell::from_runs(v, algo.name(), runs))
        })
        .collect()
}
