use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Scalar type all core math is generic over. `f64` is the default used by
/// the CLI; `f32` works for everything except the tightest golden tolerances.
pub trait Scalar:
    Float + FromPrimitive + Sum<Self> + fmt::Debug + fmt::Display + Default + Send + Sync + 'static
{
    /// Shorthand for lifting an `f64` literal into the scalar type.
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}
