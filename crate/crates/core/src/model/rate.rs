//! Rate-power models: the map from (state, power vector) to link rates,
//! plus the enumerable feasible power sets and their structural checks.

use crate::model::state::{ChannelCond, JointState, StateSpace};
use crate::model::topology::{LinkId, Topology};
use crate::real::Real;
use std::sync::Arc;

/// A rate-power function together with its feasible power sets.
///
/// Implementations must satisfy, for every state and every feasible `P`
/// with `P'` obtained by zeroing one entry of `P`:
/// - `P'` is feasible (closure under entry-zeroing);
/// - `mu(z, P, l) <= mu(z, P', l) + kappa * P[l]` for the zeroed link `l`;
/// - `mu(z, P, l') <= mu(z, P', l')` never decreases for other links.
///
/// `verify_rate_properties` checks these on any implementation.
pub trait RatePowerModel<S: Real>: Send + Sync {
    fn mu_max(&self) -> S;
    fn p_max(&self) -> S;
    fn kappa(&self) -> S;

    /// Transmission rate over `link` under state `z` and power vector `p`.
    fn link_rate(&self, topo: &Topology, z: &JointState<S>, p: &[S], link: LinkId) -> S;

    /// Enumerates the feasible power vectors for state `z`.
    ///
    /// The order is part of the controller's deterministic tie-breaking
    /// contract: the all-zero vector must come first, and per-node options
    /// must appear idle-first then by ascending link id.
    fn feasible_power_vectors(&self, topo: &Topology, z: &JointState<S>) -> Vec<Vec<S>>;
}

/// The bundled model: each node either idles or spends one unit of power on
/// exactly one outgoing link; a powered link carries `good_rate` packets
/// when its channel is Good and `bad_rate` when Bad.
#[derive(Debug, Clone)]
pub struct UnitPowerTwoState<S: Real> {
    pub good_rate: S,
    pub bad_rate: S,
}

impl<S: Real> UnitPowerTwoState<S> {
    pub fn new(good_rate: S, bad_rate: S) -> Self {
        Self {
            good_rate,
            bad_rate,
        }
    }
}

impl<S: Real> RatePowerModel<S> for UnitPowerTwoState<S> {
    fn mu_max(&self) -> S {
        self.good_rate.max(self.bad_rate)
    }

    fn p_max(&self) -> S {
        S::one()
    }

    fn kappa(&self) -> S {
        // rate jumps by at most good_rate when one unit of power is added
        self.mu_max()
    }

    fn link_rate(&self, _topo: &Topology, z: &JointState<S>, p: &[S], link: LinkId) -> S {
        if p[link] <= S::zero() {
            return S::zero();
        }
        match z.channels[link] {
            ChannelCond::Good => self.good_rate,
            ChannelCond::Bad => self.bad_rate,
        }
    }

    fn feasible_power_vectors(&self, topo: &Topology, _z: &JointState<S>) -> Vec<Vec<S>> {
        // Cartesian product of per-node choices, idle first, links ascending.
        // Node 0 varies slowest so the product order is lexicographic.
        let transmitters: Vec<usize> = (0..topo.node_count)
            .filter(|&n| !topo.out_links(n).is_empty())
            .collect();
        let mut vectors = vec![vec![S::zero(); topo.link_count()]];
        for &n in &transmitters {
            let mut next = Vec::with_capacity(vectors.len() * (topo.out_links(n).len() + 1));
            for base in &vectors {
                next.push(base.clone());
                for &(link, _) in topo.out_links(n) {
                    let mut v = base.clone();
                    v[link] = S::one();
                    next.push(v);
                }
            }
            vectors = next;
        }
        vectors
    }
}

/// Precomputed per-state action table: every feasible power vector with its
/// link rates and per-node power sums. Built once per scenario so the
/// controller and the dual evaluation never re-enumerate.
#[derive(Debug, Clone)]
pub struct PowerAction<S: Real> {
    pub power: Vec<S>,
    pub rates: Vec<S>,
    pub node_power: Vec<S>,
}

#[derive(Debug, Clone)]
pub struct PowerTable<S: Real> {
    per_state: Vec<Vec<PowerAction<S>>>,
}

impl<S: Real> PowerTable<S> {
    pub fn build(
        topo: &Topology,
        space: &StateSpace<S>,
        model: &Arc<dyn RatePowerModel<S>>,
    ) -> Self {
        let per_state = space
            .states()
            .iter()
            .map(|z| {
                model
                    .feasible_power_vectors(topo, z)
                    .into_iter()
                    .map(|power| {
                        let rates = (0..topo.link_count())
                            .map(|l| model.link_rate(topo, z, &power, l))
                            .collect();
                        let node_power = (0..topo.node_count)
                            .map(|n| {
                                topo.out_links(n)
                                    .iter()
                                    .map(|&(l, _)| power[l])
                                    .sum::<S>()
                            })
                            .collect();
                        PowerAction {
                            power,
                            rates,
                            node_power,
                        }
                    })
                    .collect()
            })
            .collect();
        Self { per_state }
    }

    pub fn actions(&self, state: usize) -> &[PowerAction<S>] {
        &self.per_state[state]
    }
}

/// One structural violation found by `verify_rate_properties`.
#[derive(Debug, Clone)]
pub enum RateViolation {
    /// Zeroing one entry left the feasible set.
    Closure { state: usize, action: usize, link: LinkId },
    /// `mu(P) > mu(P') + kappa * P[l]` on the zeroed link.
    KappaBound {
        state: usize,
        action: usize,
        link: LinkId,
        excess: f64,
    },
    /// Another link's rate decreased when this entry was zeroed.
    Monotonicity {
        state: usize,
        action: usize,
        zeroed: LinkId,
        affected: LinkId,
    },
    /// Rates above `mu_max` or per-node power above `p_max`.
    Bounds { state: usize, action: usize },
}

#[derive(Debug, Clone)]
pub struct RateReport {
    pub checks: usize,
    pub violations: Vec<RateViolation>,
}

impl RateReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the rate-function properties over every state and feasible vector,
/// or over a random subsample of `(state, vector)` pairs when `samples`
/// bounds the work. `samples = None` means exhaustive; `samples = Some(0)`
/// is a vacuous pass.
pub fn verify_rate_properties<S: Real>(
    topo: &Topology,
    space: &StateSpace<S>,
    model: &Arc<dyn RatePowerModel<S>>,
    samples: Option<usize>,
) -> RateReport {
    let mut checks = 0usize;
    let mut violations = Vec::new();
    let tol = S::of_f64(1e-9);

    let mut budget = samples;
    'outer: for m in 0..space.len() {
        let z = space.state(m);
        let vectors = model.feasible_power_vectors(topo, z);
        for (k, p) in vectors.iter().enumerate() {
            if let Some(b) = budget.as_mut() {
                if *b == 0 {
                    break 'outer;
                }
                *b -= 1;
            }
            checks += 1;

            let rates: Vec<S> = (0..topo.link_count())
                .map(|l| model.link_rate(topo, z, p, l))
                .collect();
            let rate_ok = rates.iter().all(|&r| r <= model.mu_max() + tol);
            let power_ok = (0..topo.node_count).all(|n| {
                topo.out_links(n)
                    .iter()
                    .map(|&(l, _)| p[l])
                    .sum::<S>()
                    <= model.p_max() + tol
            });
            if !rate_ok || !power_ok {
                violations.push(RateViolation::Bounds { state: m, action: k });
            }

            for l in 0..topo.link_count() {
                if p[l] <= S::zero() {
                    continue;
                }
                let mut zeroed = p.clone();
                zeroed[l] = S::zero();
                if !vectors.iter().any(|v| v == &zeroed) {
                    violations.push(RateViolation::Closure {
                        state: m,
                        action: k,
                        link: l,
                    });
                    continue;
                }
                let after = model.link_rate(topo, z, &zeroed, l);
                let bound = after + model.kappa() * p[l];
                if rates[l] > bound + tol {
                    violations.push(RateViolation::KappaBound {
                        state: m,
                        action: k,
                        link: l,
                        excess: (rates[l] - bound).as_f64(),
                    });
                }
                for other in 0..topo.link_count() {
                    if other == l {
                        continue;
                    }
                    let after_other = model.link_rate(topo, z, &zeroed, other);
                    if rates[other] > after_other + tol {
                        violations.push(RateViolation::Monotonicity {
                            state: m,
                            action: k,
                            zeroed: l,
                            affected: other,
                        });
                    }
                }
            }
        }
    }
    RateReport { checks, violations }
}
