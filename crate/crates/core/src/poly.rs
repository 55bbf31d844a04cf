//! Polynomials stored in the monomial basis, coefficient `k` multiplying `x^k`.

use num_complex::Complex64;

use crate::scalar::Scalar;

/// Coefficient vector of a polynomial, lowest degree first.
///
/// Trailing zero coefficients are never stored, so the zero polynomial has an
/// empty coefficient vector and `degree()` returns `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T: Scalar = f64> {
    coeffs: Vec<T>,
}

pub type ComplexPoly = Poly<Complex64>;

impl<T: Scalar> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly {
            coeffs: vec![T::one()],
        }
    }

    /// The monomial `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = T::one();
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `x^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn leading(&self) -> Option<T> {
        self.coeffs.last().copied()
    }

    /// Horner evaluation at a real or complex point.
    pub fn eval<U: Scalar>(&self, x: U) -> U
    where
        T: Into<U>,
    {
        self.coeffs
            .iter()
            .rev()
            .fold(U::zero(), |acc, &c| acc * x + c.into())
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c.to_complex())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn scale(&self, k: T) -> Self {
        Poly::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn div_real(&self, k: f64) -> Self {
        Poly::new(self.coeffs.iter().map(|&c| c.div_real(k)).collect())
    }

    /// Coefficients converted to another scalar type through binary64.
    pub fn map_real<U: Scalar>(&self) -> Poly<U> {
        Poly::new(
            self.coeffs
                .iter()
                .map(|c| U::from_real(c.to_complex().re))
                .collect(),
        )
    }

    /// Multiplication by the independent variable.
    pub fn shift_up(&self) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero());
        coeffs.extend_from_slice(&self.coeffs);
        Poly { coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Coefficients padded with zeros to length `len`.
    pub fn padded(&self, len: usize) -> Vec<T> {
        (0..len).map(|k| self.coeff(k)).collect()
    }

    pub fn to_complex(&self) -> ComplexPoly {
        Poly::new(self.coeffs.iter().map(|c| c.to_complex()).collect())
    }
}

impl Poly<Complex64> {
    /// Real parts of the coefficients.
    pub fn re(&self) -> Poly<f64> {
        Poly::new(self.coeffs.iter().map(|c| c.re).collect())
    }

    /// Imaginary parts of the coefficients.
    pub fn im(&self) -> Poly<f64> {
        Poly::new(self.coeffs.iter().map(|c| c.im).collect())
    }
}

impl<T: Scalar> From<Vec<T>> for Poly<T> {
    fn from(coeffs: Vec<T>) -> Self {
        Poly::new(coeffs)
    }
}
