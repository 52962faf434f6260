//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Real floating-point scalar usable throughout the crate (`f32` and `f64`).
///
/// Everything numeric is written against this trait; the crate root exposes
/// `f64` aliases for the common case.
pub trait Real: RealField + Copy + ToPrimitive + Send + Sync + 'static {
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Converts a count or index into the scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        nalgebra::convert(n as f64)
    }

    /// Lossy conversion to `f64` for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon for the type.
    fn epsilon() -> Self;
}

impl Real for f32 {
    fn epsilon() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

/// Arithmetic mean of a slice; `None` when empty.
pub fn mean<T: Real>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let sum = xs.iter().fold(T::zero(), |acc, &x| acc + x);
    Some(sum / T::from_count(xs.len()))
}

/// Median of a slice (average of the two middle values for even lengths).
pub fn median<T: Real>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = sorted.len();
    if n % 2 == 1 {
        Some(sorted[n / 2])
    } else {
        Some((sorted[n / 2 - 1] + sorted[n / 2]) / T::lit(2.0))
    }
}

/// Largest absolute value in a slice (zero for an empty slice).
pub fn max_abs<T: Real>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// Pearson correlation coefficient; zero when either input has no spread.
pub fn pearson<T: Real>(a: &[T], b: &[T]) -> T {
    let (Some(ma), Some(mb)) = (mean(a), mean(b)) else {
        return T::zero();
    };
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= T::zero() || sbb <= T::zero() {
        return T::zero();
    }
    sab / (saa * sbb).sqrt()
}
