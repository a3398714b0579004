//! Projected subgradient minimization of the perturbed empirical dual.

use crate::controller::AugmentationVectors;
use crate::error::{Error, Result};
use crate::learning::dual::{dual_eval, Multipliers};
use crate::learning::empirical::{full_support, EmpiricalDistribution};
use crate::model::Scenario;
use crate::real::Real;
use serde::Serialize;
use std::time::Instant;

/// Solver knobs. The defaults favor robustness on the small piecewise-linear
/// duals this crate produces; everything here is tunable.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop when the best value improved by less than `stall_rel_tol`
    /// (relatively) over this many iterations.
    pub stall_window: usize,
    pub stall_rel_tol: f64,
    /// Step scale; `None` uses the scenario's V.
    pub alpha0: Option<f64>,
    /// Divide the step by the subgradient norm. Without it the raw
    /// `alpha0/sqrt(k)` rule leaves a value-gap floor of order
    /// `alpha0 * |g|` that the verification tolerances reject.
    pub normalized: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            stall_window: 50,
            stall_rel_tol: 1e-6,
            alpha0: None,
            normalized: true,
        }
    }
}

impl SolverOptions {
    /// Tight settings for ground-truth oracle solves.
    pub fn oracle() -> Self {
        Self {
            max_iters: 60_000,
            stall_window: 500,
            stall_rel_tol: 1e-12,
            alpha0: None,
            normalized: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    MaxIterations,
    Stalled,
}

/// Structured record of one dual solve, for run summaries.
#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub best_value: f64,
    pub runtime_ms: f64,
    pub stop_reason: StopReason,
    pub upsilon: Vec<f64>,
    pub nu: Vec<f64>,
}

/// Minimizes `Σ_m π_m(T) g_m(υ, ν − θ)` over `υ ⪰ 0, ν ∈ ℝ` by projected
/// subgradient from the iterate `(υ, ν) = (0, θ)`, returning the best
/// iterate. The returned `ν` is the minimizer's coordinate directly, i.e.
/// the shifted multiplier `ν*(T) ≈ ν* + θ`.
pub fn solve_perturbed_dual_support<S: Real>(
    scenario: &Scenario<S>,
    support: &[(usize, S)],
    theta: &[S],
    options: &SolverOptions,
) -> (Multipliers<S>, SolverReport)
{
    let start = Instant::now();
    let pair_count = scenario.layout.pair_count();
    let energy_count = scenario.layout.energy_count();
    debug_assert_eq!(theta.len(), energy_count);

    let alpha0 = options
        .alpha0
        .map(S::of_f64)
        .unwrap_or(scenario.params.v);

    let mut upsilon = vec![S::zero(); pair_count];
    let mut nu = theta.to_vec();
    let mut shifted = vec![S::zero(); energy_count];

    let eval_at = |upsilon: &[S], nu: &[S], shifted: &mut Vec<S>| {
        for (s, (&n, &t)) in shifted.iter_mut().zip(nu.iter().zip(theta)) {
            *s = n - t;
        }
        dual_eval(scenario, support, upsilon, shifted)
    };

    let first = eval_at(&upsilon, &nu, &mut shifted);
    let mut best_value = first.value;
    let mut best = Multipliers {
        upsilon: upsilon.clone(),
        nu: nu.clone(),
    };
    let mut grad = (first.grad_upsilon, first.grad_nu);

    // ring buffer of best values for the stall test
    let window = options.stall_window.max(1);
    let mut history = vec![best_value.as_f64(); window];

    let mut iterations = 0usize;
    let mut stop_reason = StopReason::MaxIterations;
    for k in 1..=options.max_iters {
        iterations = k;
        let mut step = alpha0 / S::of_usize(k).sqrt();
        if options.normalized {
            let sq: S = grad
                .0
                .iter()
                .chain(grad.1.iter())
                .map(|&g| g * g)
                .sum();
            let norm = sq.sqrt();
            if norm > S::zero() {
                step = step / norm;
            }
        }
        for (x, &g) in upsilon.iter_mut().zip(&grad.0) {
            *x = (*x - step * g).max(S::zero());
        }
        for (x, &g) in nu.iter_mut().zip(&grad.1) {
            *x = *x - step * g;
        }

        let eval = eval_at(&upsilon, &nu, &mut shifted);
        if eval.value < best_value {
            best_value = eval.value;
            best.upsilon.clone_from(&upsilon);
            best.nu.clone_from(&nu);
        }
        grad = (eval.grad_upsilon, eval.grad_nu);

        let slot = k % window;
        let old = history[slot];
        history[slot] = best_value.as_f64();
        if k >= window {
            let improvement = old - best_value.as_f64();
            if improvement < options.stall_rel_tol * (best_value.as_f64().abs() + 1.0) {
                stop_reason = StopReason::Stalled;
                break;
            }
        }
    }

    let report = SolverReport {
        iterations,
        best_value: best_value.as_f64(),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        stop_reason,
        upsilon: best.upsilon.iter().map(|&x| x.as_f64()).collect(),
        nu: best.nu.iter().map(|&x| x.as_f64()).collect(),
    };
    (best, report)
}

/// As `solve_perturbed_dual_support`, taking the empirical counts gathered
/// during the learning window. Rejects an empty distribution.
pub fn solve_perturbed_dual<S: Real>(
    scenario: &Scenario<S>,
    distribution: &EmpiricalDistribution,
    theta: &[S],
    options: &SolverOptions,
) -> Result<(Multipliers<S>, SolverReport)> {
    let support = distribution.support::<S>()?;
    if support.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    Ok(solve_perturbed_dual_support(
        scenario, &support, theta, options,
    ))
}

/// The same perturbed solve on the ground-truth distribution with tight
/// tolerances; approximates `(υ*, ν* + θ)`.
pub fn oracle_multipliers<S: Real>(scenario: &Scenario<S>) -> (Multipliers<S>, SolverReport) {
    let support = full_support(&scenario.state_space);
    solve_perturbed_dual_support(
        scenario,
        &support,
        &scenario.params.theta,
        &SolverOptions::oracle(),
    )
}

/// Oracle for an explicit state space (used after regime changes).
pub fn oracle_multipliers_for<S: Real>(
    scenario: &Scenario<S>,
    space: &crate::model::StateSpace<S>,
) -> (Multipliers<S>, SolverReport) {
    let support = full_support(space);
    solve_perturbed_dual_support(
        scenario,
        &support,
        &scenario.params.theta,
        &SolverOptions::oracle(),
    )
}

/// Turns solved multipliers into the queue offsets the controller installs:
/// `ξ_Q = υ − Δ`, `ξ_E = ν − Δ` with Δ the configured offset.
pub fn make_augmentation<S: Real>(
    scenario: &Scenario<S>,
    multipliers: &Multipliers<S>,
) -> AugmentationVectors<S> {
    let delta = scenario.params.offset_value();
    AugmentationVectors {
        xi_q: multipliers.upsilon.iter().map(|&u| u - delta).collect(),
        xi_e: multipliers.nu.iter().map(|&n| n - delta).collect(),
    }
}
