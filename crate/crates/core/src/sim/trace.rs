//! CSV emission: per-slot traces, sweep tables, and plot-data series.

use crate::error::Result;
use crate::model::Scenario;
use crate::queues::{QueueState, Snapshot};
use crate::real::Real;
use crate::sim::metrics::RunMetrics;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Streaming per-slot trace writer.
///
/// Columns: `slot`, one `q_<node>_<dest>` per pair, one `e_<node>` per
/// energy node, then the slot's admitted/delivered/dropped counts. Output is
/// a deterministic function of the run.
pub struct TraceWriter {
    out: BufWriter<File>,
}

impl TraceWriter {
    pub fn create<S: Real>(path: impl AsRef<Path>, scenario: &Scenario<S>) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        let mut header = String::from("slot");
        for &(n, ci) in &scenario.layout.pairs {
            let dest = scenario.topology.commodities[ci];
            header.push_str(&format!(",q_{n}_{dest}"));
        }
        for &n in &scenario.layout.energy_nodes {
            header.push_str(&format!(",e_{n}"));
        }
        header.push_str(",admitted,delivered,dropped\n");
        out.write_all(header.as_bytes())?;
        Ok(Self { out })
    }

    pub fn row<S: Real>(&mut self, slot: u64, snap: &Snapshot<S>, queues: &QueueState<S>) -> Result<()> {
        let mut line = slot.to_string();
        for &q in &snap.q {
            line.push(',');
            line.push_str(&format!("{q}"));
        }
        for &e in &snap.e {
            line.push(',');
            line.push_str(&format!("{e}"));
        }
        line.push_str(&format!(
            ",{},{},{}\n",
            queues.admitted_this_slot, queues.delivered_this_slot, queues.dropped_this_slot
        ));
        self.out.write_all(line.as_bytes())?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// One row per (V, algorithm) cell of a sweep.
pub fn write_sweep_summary(path: impl AsRef<Path>, rows: &[crate::sim::sweep::SweepCell]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "v,algorithm,seeds,utility_mean,utility_std,avg_data_queue_mean,avg_energy_mean,delay_mean,delay_p99_mean,drops_total,outages_total"
    )?;
    for cell in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            cell.v,
            cell.algorithm,
            cell.runs.len(),
            cell.utility_mean,
            cell.utility_std,
            cell.avg_data_queue_mean,
            cell.avg_energy_mean,
            cell.delay_mean,
            cell.delay_p99_mean,
            cell.drops_total,
            cell.outages_total,
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Plot-data series: one row per V with one column per algorithm.
pub fn write_metric_series(
    path: impl AsRef<Path>,
    metric_name: &str,
    v_list: &[f64],
    algorithms: &[&str],
    value: impl Fn(f64, &str) -> Option<f64>,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let mut header = String::from("v");
    for algo in algorithms {
        header.push_str(&format!(",{metric_name}_{algo}"));
    }
    writeln!(out, "{header}")?;
    for &v in v_list {
        let mut line = format!("{v}");
        for algo in algorithms {
            match value(v, algo) {
                Some(x) => line.push_str(&format!(",{x}")),
                None => line.push(','),
            }
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Per-slot energy levels (raw and augmented) for convergence plots.
pub fn write_energy_series(
    path: impl AsRef<Path>,
    series: &crate::sim::engine::Series,
    energy_nodes: &[usize],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let mut header = String::from("slot");
    for &n in energy_nodes {
        header.push_str(&format!(",e_{n}"));
    }
    for &n in energy_nodes {
        header.push_str(&format!(",ehat_{n}"));
    }
    writeln!(out, "{header}")?;
    for t in 0..series.slots {
        let mut line = t.to_string();
        for &e in series.e_raw_row(t) {
            line.push_str(&format!(",{e}"));
        }
        for &e in series.e_hat_row(t) {
            line.push_str(&format!(",{e}"));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// The run summary document.
pub fn write_run_summary(path: impl AsRef<Path>, summary: &serde_json::Value) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, summary)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Builds the run-summary JSON for one run.
pub fn run_summary_json(metrics: &RunMetrics, overrides: &serde_json::Value) -> serde_json::Value {
    serde_json::json!({
        "metrics": metrics,
        "overrides": overrides,
    })
}
