//! Floating-point scalar abstraction for the numeric kernels.
//!
//! Every measure in this crate is defined over an abstract IEEE scalar so the
//! same code runs in `f32` or `f64`. The crate-root aliases pin the default
//! precision to `f64`; rounding to storage formats happens only at the image
//! I/O boundary.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Scalar type the measures are generic over: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Lifts an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn cst<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("constant representable in scalar type")
}
