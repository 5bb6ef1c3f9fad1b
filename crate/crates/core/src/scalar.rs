//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Real scalar the graph weights and all derived quantities are stored in.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// assume `f64`; `f32` works but loses roughly half of the digits.
pub trait Scalar: RealField + ToPrimitive + Copy + Display + Debug + Send + Sync + 'static {
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Converts a count into the scalar type.
    fn count(n: usize) -> Self {
        nalgebra::convert(n as f64)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
