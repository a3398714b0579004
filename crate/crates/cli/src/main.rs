//! Command-line front end: run single experiments, sweeps, the
//! convergence/regime-change experiment, scenario validation, and offline
//! multiplier oracles.
//!
//! Exit codes: 0 success, 2 validation error, 3 runtime error.

use clap::{Args, Parser, Subcommand};
use ehsim_core::error::Error as CoreError;
use ehsim_core::learning::{brute_force_primal, oracle_multipliers, oracle_multipliers_for};
use ehsim_core::model::file::{fig2_file, parse_offset, ScenarioFile};
use ehsim_core::model::scenario::{build_fig2_regime_scenario, build_tiny_scenario};
use ehsim_core::model::{verify_rate_properties, Scenario};
use ehsim_core::sim::{
    measure_convergence, run, sweep, Algorithm, ConvergenceOptions, RunOptions, SegmentTarget,
};
use ehsim_core::Scalar;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ehsim", version, about = "Multihop energy-harvesting network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Built-in scenario name (fig2, fig2-regime, tiny1node) or a path to a
    /// scenario JSON document.
    #[arg(long, default_value = "fig2")]
    scenario: String,
    /// Output directory (default: $EHSIM_OUT or ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Control parameter V >= 1.
    #[arg(long)]
    v: Option<f64>,
    /// Learning-time exponent c in (0,1).
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    /// Perturbation override (applied to every energy node).
    #[arg(long)]
    theta: Option<f64>,
    /// Learning time override, in slots.
    #[arg(long)]
    t_l: Option<u64>,
    /// Queue-offset variant: adjusted | theoretical.
    #[arg(long, default_value = "adjusted")]
    offset: String,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trace + summary.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Algorithm: lem | esa.
        #[arg(long, default_value = "lem")]
        algo: String,
        /// Force the learning step on or off.
        #[arg(long)]
        learning: Option<bool>,
        /// Also write a per-slot trace CSV.
        #[arg(long)]
        trace: bool,
    },
    /// Run the V x algorithm cross product and write the table + plot series.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated V values.
        #[arg(long, default_value = "30,40,50,80,100,150", value_delimiter = ',')]
        v_list: Vec<f64>,
        /// Comma-separated algorithms.
        #[arg(long, default_value = "lem,esa", value_delimiter = ',')]
        algos: Vec<String>,
        /// Number of seeds per cell (seed, seed+1, ...).
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
    /// Paired convergence experiment; writes energy series and a report.
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of paired seeds to average over.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Radius of the multiplier ball for the oracle-based time.
        #[arg(long, default_value_t = 50.0)]
        zeta: f64,
        /// Steady-window band fraction.
        #[arg(long, default_value_t = 0.10)]
        band: f64,
        /// Steady-window length in slots.
        #[arg(long, default_value_t = 200)]
        window: u64,
    },
    /// Check scenario structure: rate-function properties, probability mass,
    /// parameter ranges.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve the perturbed dual on the ground-truth distribution; on small
    /// instances also print the brute-force primal bound.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            common,
            algo,
            learning,
            trace,
        } => cmd_run(&common, &algo, learning, trace),
        Command::Sweep {
            common,
            v_list,
            algos,
            seeds,
        } => cmd_sweep(&common, &v_list, &algos, seeds),
        Command::Converge {
            common,
            seeds,
            zeta,
            band,
            window,
        } => cmd_converge(&common, seeds, zeta, band, window),
        Command::Validate { common } => cmd_validate(&common),
        Command::Oracle { common } => cmd_oracle(&common),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<CoreError>() {
                Some(
                    CoreError::InvalidScenario(_)
                    | CoreError::InvalidParameter(_)
                    | CoreError::Schema(_)
                    | CoreError::StateSpaceMismatch(_),
                ) => 2,
                _ => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn out_dir(common: &CommonArgs) -> anyhow::Result<PathBuf> {
    let dir = common
        .out
        .clone()
        .or_else(|| std::env::var_os("EHSIM_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Builds the scenario with command-line overrides folded in.
fn resolve_scenario(common: &CommonArgs) -> anyhow::Result<Scenario<Scalar>> {
    let v = common.v.unwrap_or(100.0);
    let c = common.c.unwrap_or(2.0 / 3.0);
    let seed = common.seed.unwrap_or(1);
    let mut scenario = match common.scenario.as_str() {
        "fig2" => {
            let mut file = fig2_file(v, c, common.horizon.unwrap_or(1_000_000), seed);
            file.parameters.theta_override = common.theta;
            file.parameters.t_l_override = common.t_l;
            file.build("fig2")?
        }
        "fig2-regime" => {
            let mut s = build_fig2_regime_scenario(v, c, seed)?;
            apply_overrides(&mut s, common);
            s
        }
        "tiny1node" => {
            let mut s = build_tiny_scenario(v, c, seed, true)?;
            apply_overrides(&mut s, common);
            s
        }
        path => {
            let file = ScenarioFile::from_path(path)?;
            let name = Path::new(path)
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("scenario")
                .to_string();
            let mut s: Scenario<Scalar> = file.build(name)?;
            // flags beat file values
            if let Some(v) = common.v {
                let c = common.c.unwrap_or(s.params.c);
                let mut refile = file.clone();
                refile.parameters.v = v;
                refile.parameters.c = c;
                s = refile.build(s.name.clone())?;
            }
            apply_overrides(&mut s, common);
            s
        }
    };
    scenario.params.offset = parse_offset(&common.offset)?;
    if let Some(h) = common.horizon {
        scenario.params.horizon = h;
    }
    Ok(scenario)
}

fn apply_overrides(scenario: &mut Scenario<Scalar>, common: &CommonArgs) {
    if let Some(seed) = common.seed {
        scenario.params.seed = seed;
    }
    if let Some(theta) = common.theta {
        scenario.params.theta = vec![theta; scenario.layout.energy_count()];
    }
    if let Some(t_l) = common.t_l {
        scenario.params.t_l = t_l;
    }
}

fn overrides_json(common: &CommonArgs) -> serde_json::Value {
    serde_json::json!({
        "scenario": common.scenario,
        "v": common.v,
        "c": common.c,
        "seed": common.seed,
        "horizon": common.horizon,
        "theta": common.theta,
        "t_l": common.t_l,
        "offset": common.offset,
    })
}

fn cmd_run(
    common: &CommonArgs,
    algo: &str,
    learning: Option<bool>,
    trace: bool,
) -> anyhow::Result<ExitCode> {
    let algorithm = Algorithm::parse(algo)?;
    let scenario = resolve_scenario(common)?;
    let dir = out_dir(common)?;
    let options = RunOptions {
        trace_path: trace.then(|| dir.join("trace.csv")),
        learning_override: learning,
        ..Default::default()
    };
    let out = run(&scenario, algorithm, &options)?;
    let summary = ehsim_core::sim::trace::run_summary_json(&out.metrics, &overrides_json(common));
    let path = dir.join("run_summary.json");
    ehsim_core::sim::trace::write_run_summary(&path, &summary)?;
    println!(
        "{} on {}: utility={:.4} avg_queue={:.1} avg_energy={:.1} delay={:.1} drops={} outages={}",
        out.metrics.algorithm,
        out.metrics.scenario,
        out.metrics.utility_total,
        out.metrics.avg_data_queue_total,
        out.metrics.avg_energy_total,
        out.metrics.delay.mean,
        out.metrics.dropped,
        out.metrics.outage_count,
    );
    println!("summary: {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(
    common: &CommonArgs,
    v_list: &[f64],
    algos: &[String],
    seeds: u64,
) -> anyhow::Result<ExitCode> {
    if v_list.is_empty() {
        return Err(CoreError::InvalidParameter("empty V list".into()).into());
    }
    let algorithms = algos
        .iter()
        .map(|a| Algorithm::parse(a))
        .collect::<Result<Vec<_>, _>>()?;
    let base_seed = common.seed.unwrap_or(1);
    let seed_list: Vec<u64> = (0..seeds.max(1)).map(|i| base_seed + i).collect();
    let dir = out_dir(common)?;

    let common = common.clone();
    let cells = sweep(v_list, &algorithms, &seed_list, move |v, seed| {
        let mut args = common.clone();
        args.v = Some(v);
        args.seed = Some(seed);
        resolve_scenario(&args).map_err(|e| match e.downcast::<CoreError>() {
            Ok(core) => core,
            Err(other) => CoreError::InvalidScenario(other.to_string()),
        })
    })?;

    ehsim_core::sim::trace::write_sweep_summary(dir.join("sweep_summary.csv"), &cells)?;
    let algo_names: Vec<&str> = algorithms.iter().map(|a| a.name()).collect();
    let lookup = |metric: fn(&ehsim_core::sim::SweepCell) -> f64| {
        let cells = cells.clone();
        move |v: f64, algo: &str| {
            cells
                .iter()
                .find(|c| c.v == v && c.algorithm == algo)
                .map(&metric)
        }
    };
    ehsim_core::sim::trace::write_metric_series(
        dir.join("utility_vs_v.csv"),
        "utility",
        v_list,
        &algo_names,
        lookup(|c| c.utility_mean),
    )?;
    ehsim_core::sim::trace::write_metric_series(
        dir.join("queue_vs_v.csv"),
        "avg_queue",
        v_list,
        &algo_names,
        lookup(|c| c.avg_data_queue_mean),
    )?;
    ehsim_core::sim::trace::write_metric_series(
        dir.join("energy_vs_v.csv"),
        "avg_energy",
        v_list,
        &algo_names,
        lookup(|c| c.avg_energy_mean),
    )?;
    ehsim_core::sim::trace::write_metric_series(
        dir.join("delay_vs_v.csv"),
        "mean_delay",
        v_list,
        &algo_names,
        lookup(|c| c.delay_mean),
    )?;
    std::fs::write(
        dir.join("sweep_summary.json"),
        serde_json::to_string_pretty(&cells)?,
    )?;

    for cell in &cells {
        println!(
            "V={:<6} {:<4} utility={:.4} avg_queue={:.1} avg_energy={:.1} delay={:.1} drops={} outages={}",
            cell.v,
            cell.algorithm,
            cell.utility_mean,
            cell.avg_data_queue_mean,
            cell.avg_energy_mean,
            cell.delay_mean,
            cell.drops_total,
            cell.outages_total,
        );
    }
    println!("wrote {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_converge(
    common: &CommonArgs,
    seeds: u64,
    zeta: f64,
    band: f64,
    window: u64,
) -> anyhow::Result<ExitCode> {
    let mut args = common.clone();
    if args.scenario == "fig2" {
        // the convergence experiment defaults to the regime-change instance
        args.scenario = "fig2-regime".into();
    }
    if args.v.is_none() {
        args.v = Some(150.0);
    }
    let dir = out_dir(&args)?;
    let base = resolve_scenario(&args)?;
    let horizon = base.params.horizon;

    // segment boundaries at the regime changes
    let mut boundaries: Vec<u64> = vec![0];
    boundaries.extend(
        base.regime_changes
            .iter()
            .map(|rc| rc.slot)
            .filter(|&s| s < horizon),
    );
    boundaries.push(horizon);
    let segments: Vec<(u64, u64)> = boundaries.windows(2).map(|w| (w[0], w[1])).collect();
    if base.regime_changes.iter().any(|rc| rc.slot >= horizon) {
        println!("note: a scheduled regime change lies beyond the horizon and never applies");
    }

    // one oracle per segment
    let mut targets = Vec::new();
    let (first, _) = oracle_multipliers(&base);
    targets.push(Some(SegmentTarget {
        upsilon: first.upsilon.iter().map(|&x| x).collect(),
        nu: first.nu.iter().map(|&x| x).collect(),
    }));
    for rc in base.regime_changes.iter().filter(|rc| rc.slot < horizon) {
        let (mult, _) = oracle_multipliers_for(&base, &rc.state_space);
        targets.push(Some(SegmentTarget {
            upsilon: mult.upsilon.clone(),
            nu: mult.nu.clone(),
        }));
    }

    let conv_opts = ConvergenceOptions {
        zeta,
        band_frac: band,
        window: window as usize,
    };
    let run_opts = RunOptions {
        record_series: true,
        ..Default::default()
    };

    let base_seed = args.seed.unwrap_or(1);
    let mut per_seed = Vec::new();
    for i in 0..seeds.max(1) {
        let mut seed_args = args.clone();
        seed_args.seed = Some(base_seed + i);
        let scenario = resolve_scenario(&seed_args)?;
        let mut row = serde_json::Map::new();
        row.insert("seed".into(), serde_json::json!(base_seed + i));
        for algo in [Algorithm::Lem, Algorithm::Esa] {
            let out = run(&scenario, algo, &run_opts)?;
            let series = out.series.as_ref().expect("series recorded");
            let report = measure_convergence(series, &segments, &targets, &conv_opts);
            if i == 0 {
                ehsim_core::sim::trace::write_energy_series(
                    dir.join(format!("energy_{}.csv", algo.name())),
                    series,
                    &scenario.layout.energy_nodes,
                )?;
            }
            row.insert(algo.name().into(), serde_json::to_value(&report)?);
        }
        per_seed.push(serde_json::Value::Object(row));
    }

    // headline means over seeds
    let mean_of = |algo: &str, seg: usize| -> Option<f64> {
        let times: Vec<f64> = per_seed
            .iter()
            .filter_map(|row| {
                row[algo]["segments"][seg]["steady_window"]
                    .as_u64()
                    .map(|t| t as f64)
            })
            .collect();
        (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64)
    };
    let mut headline = serde_json::Map::new();
    for (seg, name) in (0..segments.len()).map(|s| (s, format!("segment_{s}"))) {
        headline.insert(
            name,
            serde_json::json!({
                "lem_steady_mean": mean_of("lem", seg),
                "esa_steady_mean": mean_of("esa", seg),
            }),
        );
    }

    let report = serde_json::json!({
        "scenario": base.name,
        "v": base.params.v,
        "seeds": seeds,
        "zeta": zeta,
        "band": band,
        "window": window,
        "segments": segments,
        "headline": headline,
        "per_seed": per_seed,
    });
    let path = dir.join("convergence_report.json");
    ehsim_core::sim::trace::write_run_summary(&path, &report)?;
    println!("{}", serde_json::to_string_pretty(&report["headline"])?);
    println!("report: {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(common: &CommonArgs) -> anyhow::Result<ExitCode> {
    let scenario = resolve_scenario(common)?;
    let mass: f64 = scenario.state_space.probs().iter().sum();
    println!(
        "scenario '{}': {} nodes, {} links, {} states (mass {:.12}), {} pairs, {} energy queues",
        scenario.name,
        scenario.topology.node_count,
        scenario.topology.link_count(),
        scenario.state_space.len(),
        mass,
        scenario.layout.pair_count(),
        scenario.layout.energy_count(),
    );
    println!(
        "V={} c={} theta={:?} T_L={} horizon={} seed={}",
        scenario.params.v,
        scenario.params.c,
        scenario.params.theta,
        scenario.params.t_l,
        scenario.params.horizon,
        scenario.params.seed,
    );
    // exhaustive when small, sampled otherwise
    let sample_budget = 200_000usize;
    let exhaustive = scenario.state_space.len() * scenario.power_table.actions(0).len();
    let samples = (exhaustive > sample_budget).then_some(sample_budget);
    let report = verify_rate_properties(
        &scenario.topology,
        &scenario.state_space,
        &scenario.rate_model,
        samples,
    );
    println!(
        "rate properties: {} checks, {} violations (kappa={})",
        report.checks,
        report.violations.len(),
        scenario.rate_model.kappa(),
    );
    if report.passed() {
        println!("validate: PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        for v in report.violations.iter().take(10) {
            println!("  violation: {v:?}");
        }
        Err(CoreError::InvalidScenario("rate-function properties violated".into()).into())
    }
}

fn cmd_oracle(common: &CommonArgs) -> anyhow::Result<ExitCode> {
    let scenario = resolve_scenario(common)?;
    let (mult, report) = oracle_multipliers(&scenario);
    let theta = &scenario.params.theta;
    println!("scenario '{}', V={}", scenario.name, scenario.params.v);
    println!("dual value: {:.6}", report.best_value);
    println!("upsilon*: {:?}", mult.upsilon);
    println!("nu* (shifted by theta): {:?}", mult.nu);
    println!(
        "solver: {} iterations, {:?}, {:.1} ms",
        report.iterations, report.stop_reason, report.runtime_ms
    );
    let mut doc = serde_json::json!({
        "scenario": scenario.name,
        "v": scenario.params.v,
        "theta": theta.clone(),
        "solver": &report,
    });
    match brute_force_primal(&scenario, 200_000) {
        Some((primal, rates)) => {
            println!("brute-force primal bound: {primal:.6} at rates {rates:?}");
            println!(
                "weak duality: dual {:.6} >= primal {:.6}: {}",
                report.best_value,
                primal,
                report.best_value >= primal - 1e-6
            );
            doc["primal_bound"] = serde_json::json!({ "value": primal, "rates": rates });
        }
        None => {
            println!("brute-force primal bound skipped (instance too large)");
        }
    }
    let dir = out_dir(common)?;
    let path = dir.join("oracle.json");
    ehsim_core::sim::trace::write_run_summary(&path, &doc)?;
    println!("report: {}", path.display());
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
