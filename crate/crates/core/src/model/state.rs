//! Joint channel/harvest states and the finite state space they live in.

use crate::error::{Error, Result};
use crate::real::Real;

/// Two-state channel condition of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelCond {
    Good,
    Bad,
}

/// One joint system state: per-link channel conditions plus the per-node
/// harvestable energy this slot.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState<S: Real> {
    pub channels: Vec<ChannelCond>,
    pub harvest: Vec<S>,
}

/// Finite state space `{z_1, ..., z_M}` with probabilities.
#[derive(Debug, Clone)]
pub struct StateSpace<S: Real> {
    states: Vec<JointState<S>>,
    probs: Vec<S>,
    cum: Vec<S>,
    h_max: S,
}

impl<S: Real> StateSpace<S> {
    pub fn new(states: Vec<JointState<S>>, probs: Vec<S>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidScenario("state space must be non-empty".into()));
        }
        if states.len() != probs.len() {
            return Err(Error::InvalidScenario(
                "states and probabilities differ in length".into(),
            ));
        }
        let mut sum = S::zero();
        for &p in &probs {
            if p < S::zero() || p > S::one() {
                return Err(Error::InvalidScenario(format!(
                    "probability {p} outside [0,1]"
                )));
            }
            sum += p;
        }
        let tol = S::of_f64(1e-12).max(S::epsilon() * S::of_usize(probs.len()));
        if (sum - S::one()).abs() > tol {
            return Err(Error::InvalidScenario(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        for i in 0..states.len() {
            for j in (i + 1)..states.len() {
                if states[i] == states[j] {
                    return Err(Error::InvalidScenario(format!(
                        "states {i} and {j} are identical"
                    )));
                }
            }
        }
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = S::zero();
        for &p in &probs {
            acc += p;
            cum.push(acc);
        }
        // Force the final bucket to cover rounding residue.
        *cum.last_mut().unwrap() = S::one();
        let h_max = states
            .iter()
            .flat_map(|z| z.harvest.iter().copied())
            .fold(S::zero(), S::max);
        Ok(Self {
            states,
            probs,
            cum,
            h_max,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, m: usize) -> &JointState<S> {
        &self.states[m]
    }

    pub fn states(&self) -> &[JointState<S>] {
        &self.states
    }

    pub fn prob(&self, m: usize) -> S {
        self.probs[m]
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn h_max(&self) -> S {
        self.h_max
    }

    /// Maps a uniform draw `u in [0,1)` to a state index through the
    /// cumulative distribution.
    pub fn sample_index(&self, u: S) -> usize {
        self.cum.partition_point(|&c| c <= u)
    }

    /// True when both spaces enumerate the identical state list (required
    /// for regime changes, which may only swap probabilities).
    pub fn same_states(&self, other: &Self) -> bool {
        self.states == other.states
    }
}

/// Builds the product state space of independent two-state link channels and
/// per-node Bernoulli energy arrivals of a fixed size.
///
/// `p_good[l]` is the probability link `l` is `Good`; `harvest[n]` is
/// `(arrival size, arrival probability)` for node `n`. Nodes with size zero
/// or probability zero contribute no harvest dimension, keeping the product
/// space minimal.
pub fn product_state_space<S: Real>(
    p_good: &[S],
    harvest: &[(S, S)],
) -> Result<StateSpace<S>> {
    let link_count = p_good.len();
    let harvesters: Vec<usize> = harvest
        .iter()
        .enumerate()
        .filter(|(_, &(size, p))| size > S::zero() && p > S::zero())
        .map(|(n, _)| n)
        .collect();
    let bits = link_count + harvesters.len();
    if bits > 24 {
        return Err(Error::InvalidScenario(format!(
            "product state space with 2^{bits} states is too large"
        )));
    }
    for (l, &p) in p_good.iter().enumerate() {
        if p < S::zero() || p > S::one() {
            return Err(Error::InvalidScenario(format!(
                "link {l} good-state probability {p} outside [0,1]"
            )));
        }
    }
    for (n, &(_, p)) in harvest.iter().enumerate() {
        if p < S::zero() || p > S::one() {
            return Err(Error::InvalidScenario(format!(
                "node {n} harvest probability {p} outside [0,1]"
            )));
        }
    }
    let count = 1usize << bits;
    let mut states = Vec::with_capacity(count);
    let mut probs = Vec::with_capacity(count);
    for code in 0..count {
        let mut p = S::one();
        let mut channels = Vec::with_capacity(link_count);
        for l in 0..link_count {
            if code >> l & 1 == 1 {
                channels.push(ChannelCond::Good);
                p = p * p_good[l];
            } else {
                channels.push(ChannelCond::Bad);
                p = p * (S::one() - p_good[l]);
            }
        }
        let mut h = vec![S::zero(); harvest.len()];
        for (i, &n) in harvesters.iter().enumerate() {
            let (size, ph) = harvest[n];
            if code >> (link_count + i) & 1 == 1 {
                h[n] = size;
                p = p * ph;
            } else {
                p = p * (S::one() - ph);
            }
        }
        states.push(JointState {
            channels,
            harvest: h,
        });
        probs.push(p);
    }
    StateSpace::new(states, probs)
}
