//! The per-slot controller: harvest, admission, power, routing, and the
//! energy-availability enforcement with packet dropping.
//!
//! Every rule reads the augmented queues `Q̂ = Q + ξ_Q`, `Ê = E + ξ_E`. With
//! `ξ ≡ 0` (no learning installed) the controller is the pure drift
//! baseline; the augmentation only shifts the inputs, never the code path.
//! All tie-breaking is deterministic: smallest admission, idle-preferred
//! power with lowest link id, lowest commodity index.

use crate::model::scenario::Scenario;
use crate::model::topology::Layout;
use crate::queues::Snapshot;
use crate::real::{pos, Real};

/// Learned queue offsets, zero until the learning step installs them.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationVectors<S: Real> {
    /// Per pair.
    pub xi_q: Vec<S>,
    /// Per energy-bearing node.
    pub xi_e: Vec<S>,
}

impl<S: Real> AugmentationVectors<S> {
    pub fn zero(layout: &Layout) -> Self {
        Self {
            xi_q: vec![S::zero(); layout.pair_count()],
            xi_e: vec![S::zero(); layout.energy_count()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.xi_q.iter().all(|&x| x == S::zero()) && self.xi_e.iter().all(|&x| x == S::zero())
    }
}

/// One slot's control outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlDecision<S: Real> {
    /// Harvested energy per energy node.
    pub harvest: Vec<S>,
    /// Admission per pair.
    pub admission: Vec<S>,
    /// Index of the chosen power vector in the state's action table.
    pub power_action: usize,
    /// The chosen power vector, per link.
    pub power: Vec<S>,
    /// Per link: the commodity receiving the link's full rate, if any.
    pub mu: Vec<Option<(usize, S)>>,
    /// Per energy node: true when the node's transmissions were cancelled
    /// and its scheduled packets drop.
    pub dropped: Vec<bool>,
    /// Per energy node: energy actually consumed this slot after
    /// enforcement.
    pub consumed: Vec<S>,
}

/// `Q̂ = Q + ξ_Q`, `Ê = E + ξ_E`.
pub fn augmented_queues<S: Real>(
    snap: &Snapshot<S>,
    xi: &AugmentationVectors<S>,
) -> (Vec<S>, Vec<S>) {
    let q_hat = snap
        .q
        .iter()
        .zip(&xi.xi_q)
        .map(|(&q, &x)| q + x)
        .collect();
    let e_hat = snap
        .e
        .iter()
        .zip(&xi.xi_e)
        .map(|(&e, &x)| e + x)
        .collect();
    (q_hat, e_hat)
}

/// Harvest all available energy at nodes whose augmented level sits below
/// the perturbation, nothing elsewhere (strict inequality).
pub fn harvest_decision<S: Real>(e_hat: &[S], theta: &[S], available: &[S]) -> Vec<S> {
    e_hat
        .iter()
        .zip(theta)
        .zip(available)
        .map(|((&e, &th), &h)| if e - th < S::zero() { h } else { S::zero() })
        .collect()
}

/// Per pair, the admission maximizing `V·U(r) − Q̂·r` over the admissible
/// set; ties break toward the smaller rate.
pub fn admission_decision<S: Real>(scenario: &Scenario<S>, q_hat: &[S]) -> Vec<S> {
    let v = scenario.params.v;
    let r_max = scenario.admissions.r_max;
    (0..scenario.layout.pair_count())
        .map(|pair| {
            let u = scenario.utility.pair(pair);
            let q = q_hat[pair];
            if scenario.admissions.integer {
                let mut best_r = S::zero();
                let mut best = S::zero(); // objective at r = 0
                let mut r = S::one();
                while r <= r_max {
                    let obj = v * u.value(r) - q * r;
                    if obj > best {
                        best = obj;
                        best_r = r;
                    }
                    r += S::one();
                }
                best_r
            } else if u.weight == S::zero() {
                if q < S::zero() {
                    r_max
                } else {
                    S::zero()
                }
            } else if q <= S::zero() {
                r_max
            } else {
                // stationary point of V·w·ln(1+r) − q·r
                (v * u.weight / q - S::one()).max(S::zero()).min(r_max)
            }
        })
        .collect()
}

/// Per-link differential-backlog weights.
#[derive(Debug, Clone)]
pub struct LinkWeights<S: Real> {
    /// `max_c [Q̂_n − Q̂_b]^+` per link.
    pub weight: Vec<S>,
    /// The commodity attaining it (lowest index on ties).
    pub best_commodity: Vec<usize>,
}

/// `W⁽ᶜ⁾ = [Q̂⁽ᶜ⁾_n − Q̂⁽ᶜ⁾_b]^+` with the destination's queue fixed at
/// zero; per link the maximum over commodities.
pub fn link_weights<S: Real>(scenario: &Scenario<S>, q_hat: &[S]) -> LinkWeights<S> {
    let layout = &scenario.layout;
    let commodity_count = scenario.topology.commodities.len();
    let mut weight = Vec::with_capacity(scenario.topology.link_count());
    let mut best_commodity = Vec::with_capacity(scenario.topology.link_count());
    for link in &scenario.topology.links {
        let mut best = S::zero();
        let mut best_ci = 0usize;
        let mut found = false;
        for ci in 0..commodity_count {
            let Some(tail_pair) = layout.pair(link.from, ci) else {
                // the link tail is this commodity's destination: no backlog
                continue;
            };
            let head = layout
                .pair(link.to, ci)
                .map(|p| q_hat[p])
                .unwrap_or(S::zero());
            let w = pos(q_hat[tail_pair] - head);
            if !found || w > best {
                best = w;
                best_ci = ci;
                found = true;
            }
        }
        weight.push(best);
        best_commodity.push(best_ci);
    }
    LinkWeights {
        weight,
        best_commodity,
    }
}

/// Exact maximizer of
/// `G(P) = Σ_l μ_l(z,P)·W_l + Σ_n (Ê_n − θ_n)·Σ_b P_[n,b]`
/// over the state's enumerated feasible set. The enumeration order (all-zero
/// first, per-node idle-first then ascending link id) plus first-strict-max
/// scanning yields the idle-preferred, lowest-link-index tie rule.
pub fn power_allocation<S: Real>(
    scenario: &Scenario<S>,
    state: usize,
    e_hat: &[S],
    weights: &LinkWeights<S>,
) -> usize {
    let actions = scenario.power_table.actions(state);
    let theta = &scenario.params.theta;
    let layout = &scenario.layout;
    let mut best = S::neg_infinity();
    let mut best_k = 0usize;
    for (k, action) in actions.iter().enumerate() {
        let mut score = S::zero();
        for (l, &w) in weights.weight.iter().enumerate() {
            if action.power[l] > S::zero() {
                score += action.rates[l] * w;
            }
        }
        for (idx, &n) in layout.energy_nodes.iter().enumerate() {
            let p = action.node_power[n];
            if p > S::zero() {
                score += (e_hat[idx] - theta[idx]) * p;
            }
        }
        if score > best {
            best = score;
            best_k = k;
        }
    }
    best_k
}

/// Gives each powered link's full rate to the commodity with the maximum
/// positive weight; a zero best weight wastes the rate.
pub fn routing_scheduling<S: Real>(
    scenario: &Scenario<S>,
    state: usize,
    action: usize,
    weights: &LinkWeights<S>,
) -> Vec<Option<(usize, S)>> {
    let table = &scenario.power_table.actions(state)[action];
    (0..scenario.topology.link_count())
        .map(|l| {
            if table.power[l] > S::zero()
                && table.rates[l] > S::zero()
                && weights.weight[l] > S::zero()
            {
                Some((weights.best_commodity[l], table.rates[l]))
            } else {
                None
            }
        })
        .collect()
}

/// Enforces the per-slot energy-availability constraint: a node whose
/// scheduled power exceeds its stored energy has its transmissions cancelled
/// (scheduled packets drop) and consumes exactly its stored level.
pub fn enforce_energy<S: Real>(
    scenario: &Scenario<S>,
    state: usize,
    action: usize,
    e_raw: &[S],
) -> (Vec<bool>, Vec<S>) {
    let table = &scenario.power_table.actions(state)[action];
    let layout = &scenario.layout;
    let mut dropped = vec![false; layout.energy_count()];
    let mut consumed = vec![S::zero(); layout.energy_count()];
    for (idx, &n) in layout.energy_nodes.iter().enumerate() {
        let scheduled = table.node_power[n];
        if scheduled > e_raw[idx] {
            dropped[idx] = true;
            consumed[idx] = e_raw[idx];
        } else {
            consumed[idx] = scheduled;
        }
    }
    (dropped, consumed)
}

/// One full controller step: augment, harvest, admit, allocate power, route,
/// enforce. A pure function of its inputs.
pub fn lem_step<S: Real>(
    scenario: &Scenario<S>,
    snap: &Snapshot<S>,
    state: usize,
    xi: &AugmentationVectors<S>,
    _slot: u64,
) -> ControlDecision<S> {
    let (q_hat, e_hat) = augmented_queues(snap, xi);
    let z = scenario.state_space.state(state);
    let available: Vec<S> = scenario
        .layout
        .energy_nodes
        .iter()
        .map(|&n| z.harvest[n])
        .collect();
    let harvest = harvest_decision(&e_hat, &scenario.params.theta, &available);
    let admission = admission_decision(scenario, &q_hat);
    let weights = link_weights(scenario, &q_hat);
    let power_action = power_allocation(scenario, state, &e_hat, &weights);
    let mu = routing_scheduling(scenario, state, power_action, &weights);
    let (dropped, consumed) = enforce_energy(scenario, state, power_action, &snap.e);
    let power = scenario.power_table.actions(state)[power_action]
        .power
        .clone();
    ControlDecision {
        harvest,
        admission,
        power_action,
        power,
        mu,
        dropped,
        consumed,
    }
}

/// The perturbed quadratic potential `L(t)` and the drift bound constant
/// `B = N²(3/2·d²·μ² + R²) + N/2·(P+h)²`.
pub fn drift_diagnostics<S: Real>(scenario: &Scenario<S>, snap: &Snapshot<S>) -> (S, S) {
    let half = S::of_f64(0.5);
    let mut l = S::zero();
    for &q in &snap.q {
        l += half * q * q;
    }
    for (idx, &e) in snap.e.iter().enumerate() {
        let d = e - scenario.params.theta[idx];
        l += half * d * d;
    }
    let n = S::of_usize(scenario.topology.node_count);
    let d_max = S::of_usize(scenario.topology.d_max());
    let mu_max = scenario.rate_model.mu_max();
    let r_max = scenario.admissions.r_max;
    let p_max = scenario.rate_model.p_max();
    let h_max = scenario.h_max();
    let b = n * n * (S::of_f64(1.5) * d_max * d_max * mu_max * mu_max + r_max * r_max)
        + half * n * (p_max + h_max) * (p_max + h_max);
    (l, b)
}
