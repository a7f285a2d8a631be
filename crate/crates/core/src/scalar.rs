//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar (`f32` or `f64`).
///
/// Combines the `nalgebra` field operations needed by the dense linear algebra
/// with the `num-traits` conversions used for literals and file output.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
    /// IEEE positive infinity, the "unreachable" sentinel.
    fn infinity() -> Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Widening conversion used for serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite or infinite float converts")
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn infinity() -> Self {
                <$t>::INFINITY
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
