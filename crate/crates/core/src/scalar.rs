//! Floating point abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + LinalgScalar
    + ScalarOperand
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly rounded) in `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossless widening to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Scalar for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Arithmetic mean; `None` for an empty input.
pub(crate) fn mean<S: Scalar>(values: impl IntoIterator<Item = S>) -> Option<S> {
    let mut count = 0usize;
    let mut total = S::zero();
    for v in values {
        total += v;
        count += 1;
    }
    (count > 0).then(|| total / S::from_usize_lossy(count))
}

/// Unbiased sample variance (denominator `n - 1`); `None` for fewer than two values.
pub(crate) fn sample_variance<S: Scalar>(values: &[S]) -> Option<S> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values.iter().copied())?;
    let ss: S = values.iter().map(|&v| (v - m) * (v - m)).sum();
    Some(ss / S::from_usize_lossy(values.len() - 1))
}
