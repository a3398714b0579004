//! Scalar abstraction for the numeric core.
//!
//! All queue levels, multipliers, rates, and objective values are generic
//! over a floating-point scalar so the same code runs in `f32` or `f64`.
//! The crate root exports `f64`-based aliases, which is what the simulator
//! and CLI use.

use num_traits::{Float, FromPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, SubAssign};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + Sum
    + AddAssign
    + SubAssign
    + Display
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Conversion from `f64` configuration values.
    fn of_f64(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 conversion")
    }

    /// Conversion from a queue size.
    fn of_usize(x: usize) -> Self {
        <Self as FromPrimitive>::from_usize(x).expect("usize conversion")
    }

    /// Conversion to `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + Sum
        + AddAssign
        + SubAssign
        + Display
        + Debug
        + Default
        + Send
        + Sync
        + 'static
{
}

/// `max(x, 0)`, the positive part used throughout the queue dynamics.
pub fn pos<S: Real>(x: S) -> S {
    if x > S::zero() {
        x
    } else {
        S::zero()
    }
}
