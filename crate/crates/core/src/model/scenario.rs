//! Scenario configuration: everything a run needs, with the bundled
//! four-node data-collection instance ("fig2").

use crate::error::{Error, Result};
use crate::model::rate::{PowerTable, RatePowerModel, UnitPowerTwoState};
use crate::model::state::{product_state_space, StateSpace};
use crate::model::topology::{Layout, Link, Topology};
use crate::model::utility::UtilityModel;
use crate::real::Real;
use std::sync::Arc;

/// Which queue offset the learning step subtracts from the solved
/// multipliers when it installs the augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetVariant {
    /// `V^{1-c/2} * ln(V)` — the default working choice.
    Adjusted,
    /// `V^{1-c/2} * ln(V)^2`.
    Theoretical,
}

impl OffsetVariant {
    pub fn offset<S: Real>(self, v: S, c: S) -> S {
        let base = v.powf(S::one() - c / S::of_f64(2.0));
        match self {
            OffsetVariant::Adjusted => base * v.ln(),
            OffsetVariant::Theoretical => base * v.ln() * v.ln(),
        }
    }
}

/// Admissible per-slot admission amounts.
#[derive(Debug, Clone, Copy)]
pub struct AdmissionSet<S: Real> {
    pub r_max: S,
    /// When set, admissions are restricted to the integers `0..=r_max`.
    pub integer: bool,
}

/// Control and experiment parameters.
#[derive(Debug, Clone)]
pub struct Params<S: Real> {
    pub v: S,
    pub c: S,
    /// Per-energy-node perturbation; defaults to `V ln V` everywhere.
    pub theta: Vec<S>,
    /// Learning time in slots; defaults to `ceil(V^c ln V)`.
    pub t_l: u64,
    pub horizon: u64,
    pub seed: u64,
    pub offset: OffsetVariant,
}

impl<S: Real> Params<S> {
    pub fn new(v: S, c: S, energy_count: usize, horizon: u64, seed: u64) -> Result<Self> {
        if v < S::one() {
            return Err(Error::InvalidParameter(format!("V = {v} must be >= 1")));
        }
        if c <= S::zero() || c >= S::one() {
            return Err(Error::InvalidParameter(format!(
                "c = {c} must lie in (0,1)"
            )));
        }
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be positive".into()));
        }
        let theta = vec![v * v.ln(); energy_count];
        let t_l = default_learning_time(v, c);
        Ok(Self {
            v,
            c,
            theta,
            t_l,
            horizon,
            seed,
            offset: OffsetVariant::Adjusted,
        })
    }

    pub fn offset_value(&self) -> S {
        self.offset.offset(self.v, self.c)
    }
}

/// `ceil(V^c * ln V)`, clamped to at least one slot.
pub fn default_learning_time<S: Real>(v: S, c: S) -> u64 {
    let t = (v.powf(c) * v.ln()).ceil().as_f64();
    (t as u64).max(1)
}

/// A scheduled replacement of the state distribution mid-run.
#[derive(Debug, Clone)]
pub struct RegimeChange<S: Real> {
    pub slot: u64,
    pub state_space: StateSpace<S>,
}

/// A fully built scenario. Immutable after construction; shared across
/// concurrent runs.
pub struct Scenario<S: Real> {
    pub name: String,
    pub topology: Topology,
    pub layout: Layout,
    /// Ground-truth state distribution; the controller never reads it.
    pub state_space: StateSpace<S>,
    pub rate_model: Arc<dyn RatePowerModel<S>>,
    pub power_table: PowerTable<S>,
    pub utility: UtilityModel<S>,
    pub admissions: AdmissionSet<S>,
    pub params: Params<S>,
    pub regime_changes: Vec<RegimeChange<S>>,
}

impl<S: Real> Scenario<S> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        topology: Topology,
        state_space: StateSpace<S>,
        rate_model: Arc<dyn RatePowerModel<S>>,
        utility_weights_by_pair: Vec<S>,
        admissions: AdmissionSet<S>,
        params: Params<S>,
        regime_changes: Vec<RegimeChange<S>>,
    ) -> Result<Self> {
        let layout = Layout::new(&topology);
        if utility_weights_by_pair.len() != layout.pair_count() {
            return Err(Error::InvalidScenario(format!(
                "{} utility weights for {} pairs",
                utility_weights_by_pair.len(),
                layout.pair_count()
            )));
        }
        if params.theta.len() != layout.energy_count() {
            return Err(Error::InvalidScenario(format!(
                "{} theta entries for {} energy queues",
                params.theta.len(),
                layout.energy_count()
            )));
        }
        for z in state_space.states() {
            if z.channels.len() != topology.link_count() {
                return Err(Error::InvalidScenario(
                    "state channel vector length != link count".into(),
                ));
            }
            if z.harvest.len() != topology.node_count {
                return Err(Error::InvalidScenario(
                    "state harvest vector length != node count".into(),
                ));
            }
        }
        for (i, rc) in regime_changes.iter().enumerate() {
            if !rc.state_space.same_states(&state_space) {
                return Err(Error::StateSpaceMismatch(format!(
                    "regime change {i} enumerates different states"
                )));
            }
        }
        let power_table = PowerTable::build(&topology, &state_space, &rate_model);
        let utility = UtilityModel::from_weights(utility_weights_by_pair);
        Ok(Self {
            name: name.into(),
            topology,
            layout,
            state_space,
            rate_model,
            power_table,
            utility,
            admissions,
            params,
            regime_changes,
        })
    }

    pub fn h_max(&self) -> S {
        self.state_space.h_max()
    }
}

/// Parameters of the bundled scenario family: two-state link channels and
/// Bernoulli per-node energy arrivals, unit-power transmissions.
#[derive(Debug, Clone)]
pub struct TwoStateFamily<S: Real> {
    pub node_count: usize,
    pub links: Vec<Link>,
    pub commodities: Vec<usize>,
    pub p_good: Vec<S>,
    /// Per node: (arrival size, arrival probability).
    pub harvest: Vec<(S, S)>,
    /// Per (source node, commodity destination): utility weight.
    pub utility_weights: Vec<(usize, usize, S)>,
    pub good_rate: S,
    pub bad_rate: S,
    pub r_max: S,
    pub integer_admissions: bool,
}

impl<S: Real> TwoStateFamily<S> {
    pub fn build(
        &self,
        name: impl Into<String>,
        params_v: S,
        params_c: S,
        horizon: u64,
        seed: u64,
        regime_probs: Vec<(u64, Vec<S>, Vec<(S, S)>)>,
    ) -> Result<Scenario<S>> {
        if self.p_good.len() != self.links.len() {
            return Err(Error::InvalidScenario(
                "one good-state probability required per link".into(),
            ));
        }
        if self.harvest.len() != self.node_count {
            return Err(Error::InvalidScenario(
                "one harvest spec required per node".into(),
            ));
        }
        let topology = Topology::new(self.node_count, self.links.clone(), self.commodities.clone())?;
        let layout = Layout::new(&topology);
        let state_space = product_state_space(&self.p_good, &self.harvest)?;
        let mut weights = vec![S::zero(); layout.pair_count()];
        for &(n, dest, w) in &self.utility_weights {
            let ci = self
                .commodities
                .iter()
                .position(|&d| d == dest)
                .ok_or_else(|| {
                    Error::InvalidScenario(format!("utility names unknown commodity {dest}"))
                })?;
            let pair = layout.pair(n, ci).ok_or_else(|| {
                Error::InvalidScenario(format!(
                    "utility at node {n} for commodity {dest}: destinations admit no traffic"
                ))
            })?;
            weights[pair] = w;
        }
        let params = Params::new(params_v, params_c, layout.energy_count(), horizon, seed)?;
        let mut regime_changes = Vec::new();
        for (slot, p_good, harvest) in regime_probs {
            if p_good.len() != self.links.len() || harvest.len() != self.node_count {
                return Err(Error::StateSpaceMismatch(
                    "regime change vectors have wrong dimensions".into(),
                ));
            }
            regime_changes.push(RegimeChange {
                slot,
                state_space: product_state_space(&p_good, &harvest)?,
            });
        }
        let rate_model: Arc<dyn RatePowerModel<S>> =
            Arc::new(UnitPowerTwoState::new(self.good_rate, self.bad_rate));
        Scenario::new(
            name,
            topology,
            state_space,
            rate_model,
            weights,
            AdmissionSet {
                r_max: self.r_max,
                integer: self.integer_admissions,
            },
            params,
            regime_changes,
        )
    }
}

/// The bundled four-node data-collection instance.
///
/// Nodes 0..2 admit a single commodity destined to node 3 over links
/// (0,1),(0,2),(1,2),(1,3),(2,3) with good-state probabilities
/// (0.5, 0.2, 0.3, 0.5, 0.7); nodes 0..2 see 2-unit energy arrivals with
/// probabilities (0.6, 0.3, 0.5); utility weights are 3, 2, 1. Unit power
/// moves two packets on a Good channel and one on a Bad channel; admissions
/// are integers in {0, 1, 2}. The joint state space is the 256-state product
/// of the five link channels and three energy arrivals.
pub fn fig2_family<S: Real>() -> TwoStateFamily<S> {
    let f = S::of_f64;
    TwoStateFamily {
        node_count: 4,
        links: vec![
            Link { from: 0, to: 1 },
            Link { from: 0, to: 2 },
            Link { from: 1, to: 2 },
            Link { from: 1, to: 3 },
            Link { from: 2, to: 3 },
        ],
        commodities: vec![3],
        p_good: vec![f(0.5), f(0.2), f(0.3), f(0.5), f(0.7)],
        harvest: vec![
            (f(2.0), f(0.6)),
            (f(2.0), f(0.3)),
            (f(2.0), f(0.5)),
            (S::zero(), S::zero()),
        ],
        utility_weights: vec![(0, 3, f(3.0)), (1, 3, f(2.0)), (2, 3, f(1.0))],
        good_rate: f(2.0),
        bad_rate: f(1.0),
        r_max: f(2.0),
        integer_admissions: true,
    }
}

/// Builds the bundled scenario at the given control parameters.
pub fn build_fig2_scenario<S: Real>(v: S, c: S, seed: u64) -> Result<Scenario<S>> {
    fig2_family().build("fig2", v, c, 1_000_000, seed, Vec::new())
}

/// A single-source chain: node 0 feeds the sink node 1 over one always-Good
/// link, with Bernoulli 2-unit energy arrivals (probability 0.25) and
/// utility `3 ln(1+r)`. Small enough for grid-search and brute-force
/// reference computations.
pub fn build_tiny_scenario<S: Real>(
    v: S,
    c: S,
    seed: u64,
    integer_admissions: bool,
) -> Result<Scenario<S>> {
    let f = S::of_f64;
    let family = TwoStateFamily {
        node_count: 2,
        links: vec![Link { from: 0, to: 1 }],
        commodities: vec![1],
        p_good: vec![S::one()],
        harvest: vec![(f(2.0), f(0.25)), (S::zero(), S::zero())],
        utility_weights: vec![(0, 1, f(3.0))],
        good_rate: f(2.0),
        bad_rate: f(1.0),
        r_max: f(2.0),
        integer_admissions,
    };
    family.build("tiny1node", v, c, 100_000, seed, Vec::new())
}

/// The regime-change probability vectors used by the convergence experiment.
pub fn fig2_regime_vectors<S: Real>() -> (Vec<S>, Vec<(S, S)>) {
    let f = S::of_f64;
    (
        vec![f(0.3), f(0.2), f(0.2), f(0.5), f(0.7)],
        vec![
            (f(2.0), f(0.1)),
            (f(2.0), f(0.6)),
            (f(2.0), f(0.2)),
            (S::zero(), S::zero()),
        ],
    )
}

/// The bundled convergence experiment: 10^4 slots with the distribution
/// swap at slot 5000.
pub fn build_fig2_regime_scenario<S: Real>(v: S, c: S, seed: u64) -> Result<Scenario<S>> {
    let (p_good, harvest) = fig2_regime_vectors();
    fig2_family().build(
        "fig2-regime",
        v,
        c,
        10_000,
        seed,
        vec![(5000, p_good, harvest)],
    )
}
