//! Scalar abstraction for the numeric layer.
//!
//! The combinatorial core of the crate works over integers; floating point
//! enters only through Perron–Frobenius eigenvalues, critical constants and
//! legality ratios. Those routines are generic over [`Real`] (`f32` or
//! `f64`), with [`crate::Scalar`] fixing the default.

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: num_traits::Float + num_traits::FromPrimitive + num_traits::NumCast {
    /// Conversion from a nonnegative integer count (edge counts, matrix
    /// entries). Saturates at the largest representable value.
    fn from_count(n: u64) -> Self {
        num_traits::NumCast::from(n).unwrap_or_else(Self::max_value)
    }
}

impl Real for f32 {}
impl Real for f64 {}
