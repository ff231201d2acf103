//! Floating point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Real scalar the analysis is generic over: `f32` or `f64`.
///
/// Tolerances in the crate are stated for `f64`; with `f32` the same code
/// runs but tight residual checks may be unattainable.
pub trait Scalar: Float + FloatConst + FromPrimitive + FftNum + Debug + Display + LowerExp + Default + 'static {
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    /// `x`, but never tighter than what the precision can resolve
    /// (`1e4` ulps of one).
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(1e4))
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
