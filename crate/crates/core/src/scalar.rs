//! Scalar abstraction for the deterministic numeric kernels.

use std::fmt::{Debug, Display};

/// Floating-point scalar accepted by the generic kernels (`f32` or `f64`).
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
