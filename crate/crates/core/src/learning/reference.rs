//! Independent reference computations: an exhaustive-refinement grid search
//! over the multiplier space and a brute-force primal enumeration for small
//! instances. These never call the solver and exist to bound it.

use crate::learning::dual::dual_value;
use crate::model::Scenario;
use crate::real::Real;

/// Minimizes the perturbed dual by nested grid refinement over
/// `υ ∈ [0, hi]^p × ν ∈ [center − hi, center + hi]^e`. Exponential in the
/// multiplier dimension; intended for one- or two-dimensional instances.
pub struct GridSearch<S: Real> {
    /// Half-width of the search box.
    pub radius: S,
    /// Grid points per axis per level.
    pub points: usize,
    /// Refinement levels; each shrinks the box around the incumbent.
    pub levels: usize,
}

impl<S: Real> Default for GridSearch<S> {
    fn default() -> Self {
        Self {
            radius: S::of_f64(1.0),
            points: 33,
            levels: 6,
        }
    }
}

impl<S: Real> GridSearch<S> {
    /// Returns the best `(value, υ, ν)` found for
    /// `min Σ_m π_m g_m(υ, ν − θ)`; `ν` is reported unshifted, like the
    /// solver's output.
    pub fn minimize(
        &self,
        scenario: &Scenario<S>,
        support: &[(usize, S)],
        theta: &[S],
    ) -> (S, Vec<S>, Vec<S>) {
        let p = scenario.layout.pair_count();
        let e = scenario.layout.energy_count();
        assert!(p + e <= 4, "grid search is for tiny multiplier spaces");

        let mut center: Vec<S> = vec![S::zero(); p]
            .into_iter()
            .chain(theta.iter().copied())
            .collect();
        let mut radius = self.radius;
        let mut best_val = S::infinity();
        let mut best_point = center.clone();

        let mut shifted = vec![S::zero(); e];
        for _ in 0..self.levels {
            let steps = self.points;
            let dims = p + e;
            let mut idx = vec![0usize; dims];
            loop {
                let mut point = Vec::with_capacity(dims);
                for (d, &i) in idx.iter().enumerate() {
                    let frac = S::of_usize(i) / S::of_usize(steps - 1);
                    let x = center[d] - radius + frac * radius * S::of_f64(2.0);
                    let x = if d < p { x.max(S::zero()) } else { x };
                    point.push(x);
                }
                for j in 0..e {
                    shifted[j] = point[p + j] - theta[j];
                }
                let val = dual_value(scenario, support, &point[..p], &shifted);
                if val < best_val {
                    best_val = val;
                    best_point = point;
                }
                // odometer
                let mut d = 0;
                loop {
                    if d == dims {
                        break;
                    }
                    idx[d] += 1;
                    if idx[d] < steps {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == dims {
                    break;
                }
            }
            center.clone_from(&best_point);
            radius = radius * S::of_f64(2.5) / S::of_usize(steps - 1);
        }
        (
            best_val,
            best_point[..p].to_vec(),
            best_point[p..].to_vec(),
        )
    }
}

/// Brute-force optimum of the offline program over pure per-state policies:
/// enumerate every joint (power action, per-link commodity assignment)
/// choice across states, admit the largest feasible rates, and keep the best
/// total utility. Returns `None` when the joint space exceeds `max_combos`.
///
/// The admitted rates respect the scenario's admission set, so weak duality
/// against the enumerated dual holds exactly.
pub fn brute_force_primal<S: Real>(
    scenario: &Scenario<S>,
    max_combos: usize,
) -> Option<(S, Vec<S>)> {
    let layout = &scenario.layout;
    let topo = &scenario.topology;
    let space = &scenario.state_space;
    let commodity_count = topo.commodities.len();

    // per state: every (action, commodity-or-waste per link) combination
    let mut per_state: Vec<Vec<(Vec<S>, Vec<S>, Vec<S>)>> = Vec::with_capacity(space.len());
    // entries: (avg-out per pair contribution, avg-in per pair, node power)
    let mut total_combos = 1usize;
    for m in 0..space.len() {
        let mut options = Vec::new();
        for action in scenario.power_table.actions(m) {
            let powered: Vec<usize> = (0..topo.link_count())
                .filter(|&l| action.power[l] > S::zero() && action.rates[l] > S::zero())
                .collect();
            let assign_count = (commodity_count + 1).pow(powered.len() as u32);
            for code in 0..assign_count {
                let mut out = vec![S::zero(); layout.pair_count()];
                let mut inflow = vec![S::zero(); layout.pair_count()];
                let mut rem = code;
                let mut ok = true;
                for &l in &powered {
                    let choice = rem % (commodity_count + 1);
                    rem /= commodity_count + 1;
                    if choice == commodity_count {
                        continue; // rate wasted
                    }
                    let link = topo.links[l];
                    let Some(tail) = layout.pair(link.from, choice) else {
                        ok = false; // destination cannot send its own commodity
                        break;
                    };
                    out[tail] += action.rates[l];
                    if let Some(head) = layout.pair(link.to, choice) {
                        inflow[head] += action.rates[l];
                    }
                }
                if ok {
                    options.push((out, inflow, action.node_power.clone()));
                }
            }
        }
        total_combos = total_combos.saturating_mul(options.len());
        if total_combos > max_combos {
            return None;
        }
        per_state.push(options);
    }

    let probs: Vec<S> = (0..space.len()).map(|m| space.prob(m)).collect();
    let avg_harvest: Vec<S> = layout
        .energy_nodes
        .iter()
        .map(|&n| {
            (0..space.len())
                .map(|m| probs[m] * space.state(m).harvest[n])
                .sum()
        })
        .collect();

    let mut best: Option<(S, Vec<S>)> = None;
    let mut idx = vec![0usize; space.len()];
    loop {
        // average flows under this joint pure policy
        let mut out = vec![S::zero(); layout.pair_count()];
        let mut inflow = vec![S::zero(); layout.pair_count()];
        let mut power = vec![S::zero(); layout.energy_count()];
        for (m, &i) in idx.iter().enumerate() {
            let (o, inf, np) = &per_state[m][i];
            for pair in 0..layout.pair_count() {
                out[pair] += probs[m] * o[pair];
                inflow[pair] += probs[m] * inf[pair];
            }
            for (j, &n) in layout.energy_nodes.iter().enumerate() {
                power[j] += probs[m] * np[n];
            }
        }
        // energy feasibility: average consumption must be coverable by
        // average harvest (harvest decisions can always under-shoot)
        let energy_ok = power
            .iter()
            .zip(&avg_harvest)
            .all(|(&p, &h)| p <= h + S::of_f64(1e-12));
        if energy_ok {
            let mut feasible = true;
            let mut rates = vec![S::zero(); layout.pair_count()];
            for pair in 0..layout.pair_count() {
                let bound = out[pair] - inflow[pair];
                if bound < -S::of_f64(1e-12) {
                    feasible = false;
                    break;
                }
                let bound = bound.max(S::zero()).min(scenario.admissions.r_max);
                rates[pair] = if scenario.admissions.integer {
                    bound.floor()
                } else {
                    bound
                };
            }
            if feasible {
                let value = scenario.params.v * scenario.utility.total(&rates);
                if best.as_ref().map_or(true, |(b, _)| value > *b) {
                    best = Some((value, rates));
                }
            }
        }
        // odometer over states
        let mut d = 0;
        loop {
            if d == idx.len() {
                return best;
            }
            idx[d] += 1;
            if idx[d] < per_state[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}
