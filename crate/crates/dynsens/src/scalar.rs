//! Scalar abstraction for the numeric core.
//!
//! Every algorithm in this crate is written against [`Real`], a small
//! extension of `num_traits::Float`, so the same code runs in `f32` or
//! `f64`. The crate root exports `f64` aliases for the common case.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar used throughout the numeric core.
pub trait Real: Float + FromPrimitive + Sum + Display + Debug + Send + Sync + 'static {
    /// Convert an `f64` constant (tolerances, grid spacings) into `Self`.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 constant must convert")
    }

    /// Lossy view as `f64`, for diagnostics and report output.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where T: Float + FromPrimitive + Sum + Display + Debug + Send + Sync + 'static {}
