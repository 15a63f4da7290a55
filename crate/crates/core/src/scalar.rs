//! Scalar abstraction for the capacitance algebra.
//!
//! The capacitance matrix, its dense inverse and the Chebyshev closed forms
//! only need field operations, so they are written once against [`Scalar`]
//! and instantiated for `f32`, `f64` and exact [`BigRational`] arithmetic.
//! The rational instantiation turns every closed-form identity into an exact
//! equality, which the tests use as an oracle.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

pub trait Scalar: Signed + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// Largest `log10` magnitude a forward Chebyshev recurrence may reach
    /// before the type overflows. `None` for exact types.
    const LOG10_HEADROOM: Option<f64>;

    /// Converts a finite `f64`; `None` for non-finite input or when the value
    /// does not fit.
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64).expect("small integers are representable")
    }
}

impl Scalar for f64 {
    const LOG10_HEADROOM: Option<f64> = Some(290.0);

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    const LOG10_HEADROOM: Option<f64> = Some(35.0);

    fn from_f64(x: f64) -> Option<Self> {
        let y = x as f32;
        y.is_finite().then_some(y)
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for BigRational {
    const LOG10_HEADROOM: Option<f64> = None;

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}
