//! Empirical state-occupancy counts.

use crate::error::{Error, Result};
use crate::model::StateSpace;
use crate::real::Real;

/// Counts of observed state indices; `pi_m(T) = N_m / T`.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    counts: Vec<u64>,
    total: u64,
}

impl EmpiricalDistribution {
    pub fn new(state_count: usize) -> Self {
        Self {
            counts: vec![0; state_count],
            total: 0,
        }
    }

    pub fn observe(&mut self, state: usize) {
        assert!(state < self.counts.len(), "state index out of range");
        self.counts[state] += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, state: usize) -> u64 {
        self.counts[state]
    }

    pub fn prob<S: Real>(&self, state: usize) -> Result<S> {
        if self.total == 0 {
            return Err(Error::EmptyDistribution);
        }
        Ok(S::of_f64(self.counts[state] as f64 / self.total as f64))
    }

    /// The observed states with their empirical probabilities; states never
    /// observed are absent. Errors when nothing was observed.
    pub fn support<S: Real>(&self) -> Result<Vec<(usize, S)>> {
        if self.total == 0 {
            return Err(Error::EmptyDistribution);
        }
        let t = self.total as f64;
        Ok(self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(m, &n)| (m, S::of_f64(n as f64 / t)))
            .collect())
    }
}

/// The full ground-truth support of a state space, for oracle solves.
pub fn full_support<S: Real>(space: &StateSpace<S>) -> Vec<(usize, S)> {
    (0..space.len())
        .map(|m| (m, space.prob(m)))
        .filter(|&(_, p)| p > S::zero())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequencies() {
        let mut d = EmpiricalDistribution::new(5);
        for _ in 0..3 {
            d.observe(3);
        }
        for _ in 0..7 {
            d.observe(0);
        }
        assert_eq!(d.total(), 10);
        assert_eq!(d.prob::<f64>(3).unwrap(), 0.3);
        let support = d.support::<f64>().unwrap();
        assert_eq!(support, vec![(0, 0.7), (3, 0.3)]);
        let mass: f64 = support.iter().map(|&(_, p)| p).sum();
        assert!((mass - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_distribution_rejected() {
        let d = EmpiricalDistribution::new(4);
        assert!(d.support::<f64>().is_err());
        assert!(d.prob::<f64>(0).is_err());
    }
}
