//! Scalar traits shared by the generic matrix and polynomial code.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating point: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Entry<Real = Self>
{
    /// Convert an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Matrix entry: a real or complex number over some [`Real`].
pub trait Entry:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    type Real: Real;

    fn from_real(x: Self::Real) -> Self;
    fn magnitude(self) -> Self::Real;
    fn magnitude_sq(self) -> Self::Real;
    fn conjugate(self) -> Self;
    fn all_finite(self) -> bool;
    fn scale(self, s: Self::Real) -> Self;

    fn e_zero() -> Self {
        Self::from_real(<Self::Real as num_traits::Zero>::zero())
    }

    fn e_one() -> Self {
        Self::from_real(<Self::Real as num_traits::One>::one())
    }
}

macro_rules! impl_real_entry {
    ($($t:ty),*) => {$(
        impl Entry for $t {
            type Real = $t;
            fn from_real(x: $t) -> $t { x }
            fn magnitude(self) -> $t { Float::abs(self) }
            fn magnitude_sq(self) -> $t { self * self }
            fn conjugate(self) -> $t { self }
            fn all_finite(self) -> bool { Float::is_finite(self) }
            fn scale(self, s: $t) -> $t { self * s }
        }
    )*};
}

impl<T: Real> Entry for Complex<T> {
    type Real = T;
    fn from_real(x: T) -> Self {
        Complex::new(x, T::zero())
    }
    fn magnitude(self) -> T {
        self.re.hypot(self.im)
    }
    fn magnitude_sq(self) -> T {
        self.re * self.re + self.im * self.im
    }
    fn conjugate(self) -> Self {
        Complex::new(self.re, -self.im)
    }
    fn all_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn scale(self, s: T) -> Self {
        Complex::new(self.re * s, self.im * s)
    }
}

impl_real_entry!(f32, f64);

/// Numerically stable `log(sum(exp(x_i)))`; `-inf` for an empty or all `-inf` input.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
