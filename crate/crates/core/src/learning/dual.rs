//! The Lagrangian dual function of the offline control program, evaluated
//! by exact enumeration over the per-state action sets.
//!
//! For multipliers `(υ, ν)` the per-state value decomposes into
//! - an admission part, `sup_r V·U(r) − υ·r` per pair (state-independent);
//! - a transmission part, maximizing over the feasible power vectors with
//!   each link's full rate assigned to the commodity of largest positive
//!   multiplier differential;
//! - a harvest part, `sup_{0 ≤ e ≤ h} −ν·e`, i.e. harvest fully iff ν < 0.
//!
//! The subgradient at the maximizing actions is the negated expected
//! constraint slack.

use crate::model::Scenario;
use crate::real::{pos, Real};

/// A multiplier pair: `υ` per (node, commodity) pair (non-negative) and `ν`
/// per energy-bearing node (free sign).
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers<S: Real> {
    pub upsilon: Vec<S>,
    pub nu: Vec<S>,
}

impl<S: Real> Multipliers<S> {
    pub fn zeros(scenario: &Scenario<S>) -> Self {
        Self {
            upsilon: vec![S::zero(); scenario.layout.pair_count()],
            nu: vec![S::zero(); scenario.layout.energy_count()],
        }
    }

    pub fn norm(&self) -> S {
        let s: S = self
            .upsilon
            .iter()
            .chain(self.nu.iter())
            .map(|&x| x * x)
            .sum();
        s.sqrt()
    }

    pub fn distance(&self, other: &Self) -> S {
        let s: S = self
            .upsilon
            .iter()
            .zip(&other.upsilon)
            .chain(self.nu.iter().zip(&other.nu))
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        s.sqrt()
    }
}

/// Value and subgradient of a probability-weighted dual evaluation.
#[derive(Debug, Clone)]
pub struct DualEval<S: Real> {
    pub value: S,
    pub grad_upsilon: Vec<S>,
    pub grad_nu: Vec<S>,
}

/// The maximizing action tuple of one per-state evaluation.
#[derive(Debug, Clone)]
pub struct StateAction<S: Real> {
    pub admission: Vec<S>,
    pub power_action: usize,
    /// Per link: commodity taking the full rate, if assigned.
    pub mu: Vec<Option<(usize, S)>>,
    pub harvest: Vec<S>,
}

/// Per-pair `sup_r V·U(r) − υ·r` with its maximizer (smallest on ties).
fn admission_sup<S: Real>(scenario: &Scenario<S>, upsilon: &[S]) -> (S, Vec<S>) {
    let v = scenario.params.v;
    let r_max = scenario.admissions.r_max;
    let mut total = S::zero();
    let mut rates = Vec::with_capacity(scenario.layout.pair_count());
    for pair in 0..scenario.layout.pair_count() {
        let u = scenario.utility.pair(pair);
        let price = upsilon[pair];
        let (best, best_r) = if scenario.admissions.integer {
            let mut best = S::zero();
            let mut best_r = S::zero();
            let mut r = S::one();
            while r <= r_max {
                let obj = v * u.value(r) - price * r;
                if obj > best {
                    best = obj;
                    best_r = r;
                }
                r += S::one();
            }
            (best, best_r)
        } else {
            let r = if u.weight == S::zero() {
                S::zero()
            } else if price <= S::zero() {
                r_max
            } else {
                (v * u.weight / price - S::one()).max(S::zero()).min(r_max)
            };
            (v * u.value(r) - price * r, r)
        };
        total += best;
        rates.push(best_r);
    }
    (total, rates)
}

/// Per-link best commodity differential `max_c (υ_n − υ_b)`, destination
/// queues fixed at zero; lowest commodity index wins ties.
fn link_differentials<S: Real>(scenario: &Scenario<S>, upsilon: &[S]) -> Vec<(S, usize)> {
    let layout = &scenario.layout;
    scenario
        .topology
        .links
        .iter()
        .map(|link| {
            let mut best = S::neg_infinity();
            let mut best_ci = 0;
            for ci in 0..scenario.topology.commodities.len() {
                let Some(tail) = layout.pair(link.from, ci) else {
                    continue;
                };
                let head = layout
                    .pair(link.to, ci)
                    .map(|p| upsilon[p])
                    .unwrap_or(S::zero());
                let d = upsilon[tail] - head;
                if d > best {
                    best = d;
                    best_ci = ci;
                }
            }
            (best, best_ci)
        })
        .collect()
}

/// Evaluates `Σ_m π_m g_m(υ, ν)` over the given support, with subgradient.
pub fn dual_eval<S: Real>(
    scenario: &Scenario<S>,
    support: &[(usize, S)],
    upsilon: &[S],
    nu: &[S],
) -> DualEval<S> {
    let layout = &scenario.layout;
    let (r_value, r_star) = admission_sup(scenario, upsilon);
    let diffs = link_differentials(scenario, upsilon);

    let mut value = r_value;
    let mut grad_upsilon: Vec<S> = r_star.iter().map(|&r| -r).collect();
    let mut grad_nu = vec![S::zero(); layout.energy_count()];

    for &(m, pi) in support {
        let actions = scenario.power_table.actions(m);
        let z = scenario.state_space.state(m);

        let mut best = S::neg_infinity();
        let mut best_k = 0usize;
        for (k, action) in actions.iter().enumerate() {
            let mut score = S::zero();
            for (l, &(d, _)) in diffs.iter().enumerate() {
                if action.power[l] > S::zero() {
                    score += action.rates[l] * pos(d);
                }
            }
            for (idx, &n) in layout.energy_nodes.iter().enumerate() {
                let p = action.node_power[n];
                if p > S::zero() {
                    score += nu[idx] * p;
                }
            }
            if score > best {
                best = score;
                best_k = k;
            }
        }
        let action = &actions[best_k];

        // harvest part: e = h when the price is negative
        let mut e_value = S::zero();
        for (idx, &n) in layout.energy_nodes.iter().enumerate() {
            if nu[idx] < S::zero() {
                e_value -= nu[idx] * z.harvest[n];
                grad_nu[idx] -= pi * z.harvest[n];
            }
            grad_nu[idx] += pi * action.node_power[n];
        }
        value += pi * (best + e_value);

        // flow slacks from the transmission maximizer
        for (l, link) in scenario.topology.links.iter().enumerate() {
            let (d, ci) = diffs[l];
            if action.power[l] > S::zero() && d > S::zero() {
                let rate = action.rates[l];
                if let Some(tail) = layout.pair(link.from, ci) {
                    grad_upsilon[tail] += pi * rate;
                }
                if let Some(head) = layout.pair(link.to, ci) {
                    grad_upsilon[head] -= pi * rate;
                }
            }
        }
    }

    DualEval {
        value,
        grad_upsilon,
        grad_nu,
    }
}

/// `g_m(υ, ν)` for a single state, with the maximizing action tuple.
pub fn dual_state_value<S: Real>(
    scenario: &Scenario<S>,
    state: usize,
    upsilon: &[S],
    nu: &[S],
) -> (S, StateAction<S>) {
    let layout = &scenario.layout;
    let (r_value, r_star) = admission_sup(scenario, upsilon);
    let diffs = link_differentials(scenario, upsilon);
    let actions = scenario.power_table.actions(state);
    let z = scenario.state_space.state(state);

    let mut best = S::neg_infinity();
    let mut best_k = 0usize;
    for (k, action) in actions.iter().enumerate() {
        let mut score = S::zero();
        for (l, &(d, _)) in diffs.iter().enumerate() {
            if action.power[l] > S::zero() {
                score += action.rates[l] * pos(d);
            }
        }
        for (idx, &n) in layout.energy_nodes.iter().enumerate() {
            let p = action.node_power[n];
            if p > S::zero() {
                score += nu[idx] * p;
            }
        }
        if score > best {
            best = score;
            best_k = k;
        }
    }
    let action = &actions[best_k];
    let mut e_value = S::zero();
    let mut harvest = vec![S::zero(); layout.energy_count()];
    for (idx, &n) in layout.energy_nodes.iter().enumerate() {
        if nu[idx] < S::zero() {
            harvest[idx] = z.harvest[n];
            e_value -= nu[idx] * z.harvest[n];
        }
    }
    let mu = (0..scenario.topology.link_count())
        .map(|l| {
            let (d, ci) = diffs[l];
            if action.power[l] > S::zero() && d > S::zero() && action.rates[l] > S::zero() {
                Some((ci, action.rates[l]))
            } else {
                None
            }
        })
        .collect();
    (
        r_value + best + e_value,
        StateAction {
            admission: r_star,
            power_action: best_k,
            mu,
            harvest,
        },
    )
}

/// `g(υ, ν) = Σ_m π_m g_m(υ, ν)` over a support.
pub fn dual_value<S: Real>(
    scenario: &Scenario<S>,
    support: &[(usize, S)],
    upsilon: &[S],
    nu: &[S],
) -> S {
    dual_eval(scenario, support, upsilon, nu).value
}

/// A subgradient of `g` at `(υ, ν)`: the negated expected constraint slack
/// at the per-state maximizers.
pub fn dual_subgradient<S: Real>(
    scenario: &Scenario<S>,
    support: &[(usize, S)],
    upsilon: &[S],
    nu: &[S],
) -> (Vec<S>, Vec<S>) {
    let eval = dual_eval(scenario, support, upsilon, nu);
    (eval.grad_upsilon, eval.grad_nu)
}
