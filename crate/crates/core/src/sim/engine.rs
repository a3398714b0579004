//! The slot loop: sample the joint state, run the controller, apply queue
//! and energy updates, fire the learning step, collect metrics.

use crate::controller::{lem_step, AugmentationVectors, ControlDecision};
use crate::error::{Error, Result};
use crate::learning::{
    make_augmentation, solve_perturbed_dual, EmpiricalDistribution, Multipliers, SolverOptions,
    SolverReport,
};
use crate::model::Scenario;
use crate::queues::{Discipline, QueueState, Snapshot};
use crate::real::Real;
use crate::sim::metrics::{DelayStats, RunMetrics};
use crate::sim::trace::TraceWriter;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::path::PathBuf;

/// Which controller drives the run.
///
/// Both algorithms share the drift controller; the learned variant installs
/// the dual-learning augmentation at `T_L` and serves its data queues LIFO.
/// The baseline never learns (`ξ ≡ 0` throughout) and serves FIFO, which is
/// what gives it the linear-in-V per-packet delays it is known for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Lem,
    Esa,
}

impl Algorithm {
    pub fn learns(self) -> bool {
        matches!(self, Algorithm::Lem)
    }

    pub fn discipline(self) -> Discipline {
        match self {
            Algorithm::Lem => Discipline::Lifo,
            Algorithm::Esa => Discipline::Fifo,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lem => "lem",
            Algorithm::Esa => "esa",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lem" => Ok(Algorithm::Lem),
            "esa" => Ok(Algorithm::Esa),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm '{other}' (expected 'lem' or 'esa')"
            ))),
        }
    }
}

/// Per-slot augmented-queue series kept in memory when requested.
#[derive(Debug, Clone)]
pub struct Series {
    pub slots: usize,
    pub pairs: usize,
    pub energy: usize,
    /// Row-major `[slot][pair]`.
    pub q_hat: Vec<f64>,
    /// Row-major `[slot][energy node]`.
    pub e_hat: Vec<f64>,
    pub e_raw: Vec<f64>,
}

impl Series {
    pub fn q_hat_row(&self, slot: usize) -> &[f64] {
        &self.q_hat[slot * self.pairs..(slot + 1) * self.pairs]
    }
    pub fn e_hat_row(&self, slot: usize) -> &[f64] {
        &self.e_hat[slot * self.energy..(slot + 1) * self.energy]
    }
    pub fn e_raw_row(&self, slot: usize) -> &[f64] {
        &self.e_raw[slot * self.energy..(slot + 1) * self.energy]
    }
}

/// A recorded controller invocation, for offline optimality checks.
#[derive(Debug, Clone)]
pub struct DecisionProbe<S: Real> {
    pub slot: u64,
    pub state: usize,
    pub snapshot: Snapshot<S>,
    pub xi: AugmentationVectors<S>,
    pub decision: ControlDecision<S>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Keep the per-slot augmented-queue series in memory.
    pub record_series: bool,
    /// Stream a per-slot trace CSV to this path.
    pub trace_path: Option<PathBuf>,
    /// Record the controller inputs/outputs at these slots.
    pub probe_slots: Vec<u64>,
    /// Force learning on or off regardless of the algorithm (ablations).
    pub learning_override: Option<bool>,
    /// Solver settings for the learning step.
    pub solver: SolverOptions,
}

pub struct RunOutput<S: Real> {
    pub metrics: RunMetrics,
    pub series: Option<Series>,
    pub probes: Vec<DecisionProbe<S>>,
    /// The augmentation in force at the end of the run.
    pub xi: AugmentationVectors<S>,
    pub learned: Option<Multipliers<S>>,
}

/// Runs one seeded, deterministic simulation.
pub fn run<S: Real>(
    scenario: &Scenario<S>,
    algorithm: Algorithm,
    options: &RunOptions,
) -> Result<RunOutput<S>> {
    let params = &scenario.params;
    let horizon = params.horizon;
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let layout = &scenario.layout;
    let pairs = layout.pair_count();
    let energy = layout.energy_count();

    let mut queues = QueueState::<S>::new(&scenario.topology, layout, algorithm.discipline());
    // dedicated substream for state sampling so paired runs share it
    let mut state_rng = ChaCha12Rng::seed_from_u64(params.seed);
    state_rng.set_stream(1);

    let learns = options.learning_override.unwrap_or(algorithm.learns());
    let mut empirical = EmpiricalDistribution::new(scenario.state_space.len());
    let mut xi = AugmentationVectors::zero(layout);
    let mut learned: Option<Multipliers<S>> = None;
    let mut solver_report: Option<SolverReport> = None;

    let mut trace = match &options.trace_path {
        Some(path) => Some(TraceWriter::create(path, scenario)?),
        None => None,
    };

    let mut series = options.record_series.then(|| Series {
        slots: horizon as usize,
        pairs,
        energy,
        q_hat: Vec::with_capacity(horizon as usize * pairs),
        e_hat: Vec::with_capacity(horizon as usize * energy),
        e_raw: Vec::with_capacity(horizon as usize * energy),
    });
    let mut probes = Vec::with_capacity(options.probe_slots.len());

    let mut q_slot_sum = vec![0f64; pairs];
    let mut e_slot_sum = vec![0f64; energy];
    let mut admitted_sum = vec![0f64; pairs];
    let mut dropped_before_t_l = 0u64;

    let mut regime_iter = scenario.regime_changes.iter().peekable();
    let mut current_space = &scenario.state_space;

    for t in 0..horizon {
        while regime_iter
            .peek()
            .map_or(false, |rc| rc.slot == t)
        {
            current_space = &regime_iter.next().unwrap().state_space;
        }

        let u = S::of_f64(state_rng.gen::<f64>());
        let m = current_space.sample_index(u);

        if learns && t == params.t_l {
            let (mult, report) =
                solve_perturbed_dual(scenario, &empirical, &params.theta, &options.solver)?;
            xi = make_augmentation(scenario, &mult);
            learned = Some(mult);
            solver_report = Some(report);
        }
        if learns && t < params.t_l {
            empirical.observe(m);
        }

        let snap = queues.snapshot();
        let decision = lem_step(scenario, &snap, m, &xi, t);

        if options.probe_slots.contains(&t) {
            probes.push(DecisionProbe {
                slot: t,
                state: m,
                snapshot: snap.clone(),
                xi: xi.clone(),
                decision: decision.clone(),
            });
        }

        queues.begin_slot();
        // transmissions (or the dropping rule) against start-of-slot queues
        for (l, link) in scenario.topology.links.iter().enumerate() {
            if let Some((ci, rate)) = decision.mu[l] {
                let rate = rate.floor().as_f64() as usize;
                if rate == 0 {
                    continue;
                }
                let idx = layout
                    .energy(link.from)
                    .expect("powered link tail has an energy queue");
                if decision.dropped[idx] {
                    queues.drop_scheduled(link.from, ci, rate);
                } else {
                    queues.transfer(link.from, link.to, ci, rate, t);
                }
            }
        }
        // admissions
        for (pair, &(node, ci)) in layout.pairs.iter().enumerate() {
            let amount = decision.admission[pair].round().as_f64() as usize;
            if amount > 0 {
                queues.admit(node, ci, amount, t)?;
            }
            admitted_sum[pair] += decision.admission[pair].as_f64();
        }
        // energy consumption and harvest
        for idx in 0..energy {
            queues.energy_step(idx, decision.consumed[idx], decision.harvest[idx]);
        }
        queues.finish_slot();

        if t < params.t_l {
            dropped_before_t_l += queues.dropped_this_slot;
        }

        for (pair, &q) in snap.q.iter().enumerate() {
            q_slot_sum[pair] += q.as_f64();
        }
        for (idx, &e) in snap.e.iter().enumerate() {
            e_slot_sum[idx] += e.as_f64();
        }

        if let Some(series) = series.as_mut() {
            for (pair, &q) in snap.q.iter().enumerate() {
                series.q_hat.push((q + xi.xi_q[pair]).as_f64());
            }
            for (idx, &e) in snap.e.iter().enumerate() {
                series.e_hat.push((e + xi.xi_e[idx]).as_f64());
                series.e_raw.push(e.as_f64());
            }
        }
        if let Some(tw) = trace.as_mut() {
            tw.row(t, &snap, &queues)?;
        }
    }

    if let Some(tw) = trace.take() {
        tw.finish()?;
    }

    let h = horizon as f64;
    let admitted_rate: Vec<f64> = admitted_sum.iter().map(|s| s / h).collect();
    let rate_s: Vec<S> = admitted_rate.iter().map(|&r| S::of_f64(r)).collect();
    let utility_total = scenario.utility.total(&rate_s).as_f64();
    let avg_data_queue: Vec<f64> = q_slot_sum.iter().map(|s| s / h).collect();
    let avg_energy: Vec<f64> = e_slot_sum.iter().map(|s| s / h).collect();
    let mut delays = std::mem::take(&mut queues.delays);
    let delay = DelayStats::from_delays(&mut delays);
    let dropped = queues.dropped_total;
    let admitted = queues.admitted_total;

    let metrics = RunMetrics {
        scenario: scenario.name.clone(),
        algorithm: algorithm.name().to_string(),
        v: params.v.as_f64(),
        c: params.c.as_f64(),
        seed: params.seed,
        horizon,
        t_l: params.t_l,
        admitted_rate,
        utility_total,
        avg_data_queue_total: avg_data_queue.iter().sum(),
        avg_data_queue,
        avg_energy_total: avg_energy.iter().sum(),
        avg_energy,
        max_energy: queues.energy_max().iter().map(|&e| e.as_f64()).collect(),
        delay,
        admitted,
        delivered: queues.delivered_total,
        dropped,
        drop_rate: if admitted > 0 {
            dropped as f64 / admitted as f64
        } else {
            0.0
        },
        dropped_before_t_l,
        outage_count: queues.outage_count,
        solver: solver_report,
    };

    Ok(RunOutput {
        metrics,
        series,
        probes,
        xi,
        learned,
    })
}
