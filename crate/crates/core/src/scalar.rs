use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use twofloat::TwoFloat;

/// Field of polynomial coefficients and vector entries: `f64`, `Complex64`,
/// or the double-double [`TwoFloat`] used where binary64 loses too much.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn scale(self, k: f64) -> Self;
    fn div_real(self, k: f64) -> Self;
    fn to_complex(self) -> Complex64;
    fn is_zero(self) -> bool {
        self == Self::zero()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn div_real(self, k: f64) -> Self {
        self / k
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn div_real(self, k: f64) -> Self {
        self / k
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

impl Scalar for TwoFloat {
    fn zero() -> Self {
        TwoFloat::from(0.0)
    }
    fn one() -> Self {
        TwoFloat::from(1.0)
    }
    fn from_real(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        self.hi().abs()
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn div_real(self, k: f64) -> Self {
        self / k
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self.hi() + self.lo(), 0.0)
    }
}

/// Real part rounded to binary64.
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_complex().re
}

/// Euclidean inner product `sum x_i conj(y_i)` over the common prefix;
/// missing entries count as zero.
pub fn inner<T: Scalar>(x: &[T], y: &[T]) -> Complex64 {
    x.iter()
        .zip(y)
        .fold(Complex64::new(0.0, 0.0), |acc, (&xi, &yi)| {
            acc + (xi * yi.conj()).to_complex()
        })
}

pub fn norm<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.abs() * v.abs()).sum::<f64>().sqrt()
}
