//! Scalar abstraction for the reliability statistics.
//!
//! The closed-form and Monte-Carlo statistics are written once over [`Real`]
//! and instantiated for `f64` (the default everywhere) and `f32`. PUF models and
//! file formats stay in `f64` because the on-disk encodings are IEEE-754 doubles.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the statistics module: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Conversion from a count.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
