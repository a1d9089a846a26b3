//! Scalar abstraction: every numeric routine in this crate is generic over
//! [`Real`], instantiated at `f32` or `f64`. The crate root exports `f64`
//! aliases for the common types.

use std::fmt::{Debug, Display};

use num_traits::{Float, NumAssignOps};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Float + NumAssignOps + Debug + Display + Default + Send + Sync + 'static {
    /// Conversion from `f64` (identity for `f64`, rounds for `f32`).
    fn from_f64(x: f64) -> Self;

    /// Exact widening to `f64` (identity for `f64`).
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}
