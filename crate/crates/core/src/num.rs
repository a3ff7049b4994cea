use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Floating-point scalar the decompositions are generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; used for literals and noise samples.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn energy<T: Real>(a: &[T]) -> T {
    dot(a, a)
}

/// Population standard deviation.
pub(crate) fn std_dev<T: Real>(a: &[T]) -> T {
    let n = T::from_usize_lossy(a.len());
    let mean = a.iter().copied().sum::<T>() / n;
    (a.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n).sqrt()
}

pub(crate) fn max_abs<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}
