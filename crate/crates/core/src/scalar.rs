use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type the forest and imputation code is generic over.
///
/// Implemented for `f32` and `f64`. Everything that touches randomness or
/// text formats converts through `f64` so results are reproducible across
/// scalar types up to rounding.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + FromStr + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute floor below which a split gain is treated as numerical noise.
    fn gain_floor() -> Self;

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite value representable as float")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn gain_floor() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn gain_floor() -> Self {
        1e-6
    }
}
