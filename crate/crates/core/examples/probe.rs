//! Scratch probe: run the bundled scenario at a few V values and print the
//! headline metrics side by side.

use ehsim_core::learning::oracle_multipliers;
use ehsim_core::model::scenario::{build_fig2_regime_scenario, build_fig2_scenario};
use ehsim_core::sim::{measure_convergence, run, Algorithm, ConvergenceOptions, RunOptions, SegmentTarget};

fn main() {
    let c = 2.0 / 3.0;
    let horizon: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200_000);

    for v in [30.0, 150.0] {
        for algo in [Algorithm::Lem, Algorithm::Esa] {
            let mut s = build_fig2_scenario(v, c, 1).unwrap();
            s.params.horizon = horizon;
            let out = run(&s, algo, &RunOptions::default()).unwrap();
            let m = &out.metrics;
            println!(
                "V={v:>5} {:<4} util={:>7.3} rates={:?} Qavg={:?} (tot {:.1}) Eavg={:?} (tot {:.1}) delay mean={:.1} p99={:.0} drops={} pre_tl={} outages={}",
                m.algorithm,
                m.utility_total,
                m.admitted_rate.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>(),
                m.avg_data_queue.iter().map(|q| q.round()).collect::<Vec<_>>(),
                m.avg_data_queue_total,
                m.avg_energy.iter().map(|e| e.round()).collect::<Vec<_>>(),
                m.avg_energy_total,
                m.delay.mean,
                m.delay.p99,
                m.dropped,
                m.dropped_before_t_l,
                m.outage_count,
            );
            if let Some(sr) = &m.solver {
                println!(
                    "      solver: iters={} value={:.2} upsilon={:?} nu={:?} theta={:.1}",
                    sr.iterations,
                    sr.best_value,
                    sr.upsilon.iter().map(|x| x.round()).collect::<Vec<_>>(),
                    sr.nu.iter().map(|x| x.round()).collect::<Vec<_>>(),
                    v * f64::ln(v),
                );
            }
        }
    }

    // convergence race at V=150
    let v = 150.0;
    let s = build_fig2_regime_scenario(v, c, 1).unwrap();
    let (oracle_a, _) = oracle_multipliers(&s);
    let (oracle_b, _) = ehsim_core::learning::oracle_multipliers_for(&s, &s.regime_changes[0].state_space);
    println!(
        "oracle A: upsilon={:?} nu={:?}",
        oracle_a.upsilon.iter().map(|x| x.round()).collect::<Vec<_>>(),
        oracle_a.nu.iter().map(|x| x.round()).collect::<Vec<_>>()
    );
    println!(
        "oracle B: upsilon={:?} nu={:?}",
        oracle_b.upsilon.iter().map(|x| x.round()).collect::<Vec<_>>(),
        oracle_b.nu.iter().map(|x| x.round()).collect::<Vec<_>>()
    );
    for seed in 1..=3 {
        let mut s = build_fig2_regime_scenario(v, c, seed).unwrap();
        s.params.horizon = 10_000;
        for algo in [Algorithm::Lem, Algorithm::Esa] {
            let out = run(
                &s,
                algo,
                &RunOptions {
                    record_series: true,
                    ..Default::default()
                },
            )
            .unwrap();
            let series = out.series.as_ref().unwrap();
            let targets = vec![
                Some(SegmentTarget {
                    upsilon: oracle_a.upsilon.clone(),
                    nu: oracle_a.nu.clone(),
                }),
                Some(SegmentTarget {
                    upsilon: oracle_b.upsilon.clone(),
                    nu: oracle_b.nu.clone(),
                }),
            ];
            let report = measure_convergence(
                series,
                &[(0, 5000), (5000, 10_000)],
                &targets,
                &ConvergenceOptions::default(),
            );
            println!(
                "seed={seed} {:<4} init: steady={:?} t_zeta={:?} | re: steady={:?} t_zeta={:?}",
                out.metrics.algorithm,
                report.segments[0].steady_window,
                report.segments[0].t_zeta,
                report.segments[1].steady_window,
                report.segments[1].t_zeta,
            );
        }
    }
}
