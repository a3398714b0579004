//! Concave admission utilities.

use crate::real::Real;

/// A per-(node, commodity) utility `U(r) = weight * ln(1 + r)`.
///
/// `U(0) = 0`, increasing and strictly concave; the first derivative at 0 is
/// the weight itself. A zero weight stands for "no traffic admitted here".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledLogUtility<S: Real> {
    pub weight: S,
}

impl<S: Real> ScaledLogUtility<S> {
    pub fn value(&self, r: S) -> S {
        self.weight * (S::one() + r).ln()
    }

    pub fn derivative(&self, r: S) -> S {
        self.weight / (S::one() + r)
    }
}

/// Per-pair utilities, aligned with the layout's pair indexing.
#[derive(Debug, Clone)]
pub struct UtilityModel<S: Real> {
    weights: Vec<S>,
}

impl<S: Real> UtilityModel<S> {
    pub fn from_weights(weights: Vec<S>) -> Self {
        Self { weights }
    }

    pub fn pair(&self, pair: usize) -> ScaledLogUtility<S> {
        ScaledLogUtility {
            weight: self.weights[pair],
        }
    }

    pub fn value(&self, pair: usize, r: S) -> S {
        self.pair(pair).value(r)
    }

    /// Maximum first derivative at zero over all pairs.
    pub fn beta(&self) -> S {
        self.weights.iter().copied().fold(S::zero(), S::max)
    }

    /// Total utility of a rate vector (one rate per pair).
    pub fn total(&self, rates: &[S]) -> S {
        rates
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * (S::one() + r).ln())
            .sum()
    }
}
