//! Real scalar abstraction.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point type the numerics are generic over: `f32` or `f64`.
///
/// The tolerances quoted in the docs (unitarity to 1e-10, gradient
/// agreement to 1e-6) are for `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    /// Convergence threshold for iterative kernels (Jacobi sweeps).
    fn tiny() -> Self;
}

impl Scalar for f32 {
    fn tiny() -> Self {
        1e-7
    }
}

impl Scalar for f64 {
    fn tiny() -> Self {
        1e-15
    }
}
