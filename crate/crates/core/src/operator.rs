//! The associated operator `A` of a pencil and the spectral function
//! `S(u, v) = (u(A) e0, v(A) e0)`.
//!
//! `A` is determined by `A e0 = (e1 - beta e0) / alpha` and `A J3 = J5` on
//! finite vectors. Every application of `A` raises the support by exactly one
//! index, so `A` is stored as an explicit column-finite matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{PencilError, Result};
use twofloat::TwoFloat;

use crate::pencil::{associated_polynomials_in, JacobiMatrix, Pencil};
use crate::poly::{ComplexPoly, Poly};
use crate::scalar::{inner, to_f64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Column `n` holds the coordinates of `A e_n`.
    Standard,
    /// Column `k` holds the monomial coefficients of `A x^k`.
    Monomial,
}

/// Column-finite matrix whose column `n` is supported in `0..=n+1`.
///
/// The entry type defaults to `f64`; `OperatorMatrix<TwoFloat>` keeps the
/// columns in double-double for evaluations whose conditioning exceeds binary64.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Scalar = f64> {
    cols: Vec<Vec<T>>,
    basis: Basis,
}

impl<T: Scalar> OperatorMatrix<T> {
    /// Columns longer than `n + 2` are rejected; shorter ones are zero padded.
    pub fn new(cols: Vec<Vec<T>>, basis: Basis) -> Result<Self> {
        let mut out = Vec::with_capacity(cols.len());
        for (n, mut col) in cols.into_iter().enumerate() {
            if col.len() > n + 2 {
                return Err(PencilError::InvalidInput {
                    pointer: format!("/columns/{n}"),
                    message: format!(
                        "column {n} has {} entries, at most {} allowed",
                        col.len(),
                        n + 2
                    ),
                });
            }
            if let Some(i) = col.iter().position(|v| !to_f64(*v).is_finite()) {
                return Err(PencilError::InvalidInput {
                    pointer: format!("/columns/{n}/{i}"),
                    message: "entry is not finite".into(),
                });
            }
            col.resize(n + 2, T::zero());
            out.push(col);
        }
        Ok(OperatorMatrix { cols: out, basis })
    }

    pub fn size(&self) -> usize {
        self.cols.len()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.cols
    }

    pub fn column(&self, n: usize) -> Result<&[T]> {
        self.cols
            .get(n)
            .map(Vec::as_slice)
            .ok_or(PencilError::TruncationExceeded {
                band: "columns",
                index: n,
                available: self.cols.len(),
            })
    }

    /// Entry in row `i` of column `j`, rounded to binary64.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.cols
            .get(j)
            .and_then(|c| c.get(i))
            .map_or(0.0, |&v| to_f64(v))
    }

    /// The subdiagonal entry `(n + 1, n)`.
    pub fn leading(&self, n: usize) -> f64 {
        self.entry(n + 1, n)
    }

    /// Dense `rows x cols` block.
    pub fn dense(&self, rows: usize, cols: usize) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |i, j| self.entry(i, j))
    }

    /// The same matrix with entries rounded to binary64.
    pub fn to_f64(&self) -> OperatorMatrix<f64> {
        OperatorMatrix {
            cols: self
                .cols
                .iter()
                .map(|c| c.iter().map(|&v| to_f64(v)).collect())
                .collect(),
            basis: self.basis,
        }
    }

    /// Leading `n` columns.
    pub fn truncated(&self, n: usize) -> OperatorMatrix<T> {
        OperatorMatrix {
            cols: self.cols.iter().take(n).cloned().collect(),
            basis: self.basis,
        }
    }

    /// `A v` for a vector of length at most `size`; the result is one longer.
    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); v.len() + 1];
        for (n, &x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, &c) in self.column(n)?.iter().enumerate() {
                out[i] += x * c;
            }
        }
        Ok(out)
    }

    /// `u(A) e0` by Horner's scheme; the result has length `deg u + 1`.
    pub fn apply_poly_at_e0(&self, u: &Poly<T>) -> Result<Vec<T>> {
        let Some(d) = u.degree() else {
            return Ok(vec![T::zero()]);
        };
        if d + 1 > self.size() {
            return Err(PencilError::TruncationExceeded {
                band: "columns",
                index: d + 1,
                available: self.size(),
            });
        }
        let mut y = vec![u.coeff(d)];
        for k in (0..d).rev() {
            y = self.apply(&y)?;
            y[0] += u.coeff(k);
        }
        Ok(y)
    }

    /// `u(A) e0` for a complex polynomial, from its real and imaginary parts.
    pub fn apply_complex_poly_at_e0(&self, u: &ComplexPoly) -> Result<Vec<Complex64>> {
        let re = self.apply_poly_at_e0(&u.re().map_real())?;
        let im = self.apply_poly_at_e0(&u.im().map_real())?;
        let len = re.len().max(im.len());
        Ok((0..len)
            .map(|i| {
                let x = re.get(i).map_or(0.0, |&v| to_f64(v));
                let y = im.get(i).map_or(0.0, |&v| to_f64(v));
                Complex64::new(x, y)
            })
            .collect())
    }

    /// `A^n e0` with the positivity of its last coordinate asserted.
    pub fn power_e0_expansion(&self, n: usize) -> Result<Vec<T>> {
        if n + 1 > self.size() {
            return Err(PencilError::TruncationExceeded {
                band: "columns",
                index: n + 1,
                available: self.size(),
            });
        }
        let mut y = vec![T::one()];
        for _ in 0..n {
            y = self.apply(&y)?;
        }
        if !(to_f64(y[n]) > 0.0) {
            return Err(PencilError::NumericalFailure(format!(
                "leading coefficient of A^{n} e0 is {:?} (expected > 0)",
                y[n]
            )));
        }
        Ok(y)
    }
}

/// The standard-basis matrix of `A` with columns `0..=n`.
pub fn build_associated_operator(theta: &Pencil, n: usize) -> Result<OperatorMatrix> {
    build_associated_operator_in(theta, n)
}

/// [`build_associated_operator`] carried out in the scalar type `T`.
pub fn build_associated_operator_in<T: Scalar>(
    theta: &Pencil,
    n: usize,
) -> Result<OperatorMatrix<T>> {
    if !(theta.alpha > 0.0) {
        return Err(PencilError::InvalidPencil(format!(
            "alpha = {} is not positive",
            theta.alpha
        )));
    }
    let j3 = &theta.j3;
    let mut cols: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    cols.push(vec![
        T::from_real(-theta.beta).div_real(theta.alpha),
        T::one().div_real(theta.alpha),
    ]);
    for m in 0..n {
        // A J3 e_m = J5 e_m solved for A e_{m+1}
        let a_m = j3.a(m)?;
        if !(a_m > 0.0) {
            return Err(PencilError::InvalidPencil(format!(
                "a_{m} = {a_m} is not positive"
            )));
        }
        let mut col: Vec<T> = theta.j5.column(m)?.into_iter().map(T::from_real).collect();
        let b_m = j3.b(m)?;
        for (i, &c) in cols[m].iter().enumerate() {
            col[i] -= c.scale(b_m);
        }
        if m > 0 {
            let a_prev = j3.a(m - 1)?;
            for (i, &c) in cols[m - 1].iter().enumerate() {
                col[i] -= c.scale(a_prev);
            }
        }
        for c in col.iter_mut() {
            *c = c.div_real(a_m);
        }
        if !(to_f64(col[m + 2]) > 0.0) {
            return Err(PencilError::InvalidPencil(format!(
                "f_({}, {}) = {:?} is not positive",
                m + 1,
                m + 2,
                col[m + 2]
            )));
        }
        cols.push(col);
    }
    OperatorMatrix::new(cols, Basis::Standard)
}

/// Decomposition `f = zeta e0 + sum_n xi_n J3 e_n`, peeled from the top index.
pub fn decompose_e0_u_basis<T: Scalar>(j3: &JacobiMatrix, f: &[T]) -> Result<(T, Vec<T>)> {
    if f.is_empty() {
        return Ok((T::zero(), Vec::new()));
    }
    let mut r = f.to_vec();
    let mut xi = vec![T::zero(); f.len() - 1];
    for j in (1..f.len()).rev() {
        let a = j3.a(j - 1)?;
        let x = r[j].scale(1.0 / a);
        xi[j - 1] = x;
        r[j] = T::zero();
        r[j - 1] -= x.scale(j3.b(j - 1)?);
        if j >= 2 {
            r[j - 2] -= x.scale(j3.a(j - 2)?);
        }
    }
    Ok((r[0], xi))
}

/// `A f` straight from the defining formula
/// `A f = (zeta/alpha)(e1 - beta e0) + sum_n xi_n J5 e_n`.
pub fn apply_direct<T: Scalar>(theta: &Pencil, f: &[T]) -> Result<Vec<T>> {
    let (zeta, xi) = decompose_e0_u_basis(&theta.j3, f)?;
    let mut out = vec![T::zero(); f.len().max(1) + 1];
    out[0] -= zeta.scale(theta.beta / theta.alpha);
    out[1] += zeta.scale(1.0 / theta.alpha);
    for (n, &x) in xi.iter().enumerate() {
        let w = theta.j5.column(n)?;
        for (i, &c) in w.iter().enumerate().take(out.len()) {
            out[i] += x.scale(c);
        }
    }
    Ok(out)
}

/// `S(u, v) = (u(A) e0, v(A) e0)`, linear in `u` and conjugate-linear in `v`.
pub fn spectral_function<T: Scalar>(
    a: &OperatorMatrix<T>,
    u: &ComplexPoly,
    v: &ComplexPoly,
) -> Result<Complex64> {
    let x = a.apply_complex_poly_at_e0(u)?;
    let y = a.apply_complex_poly_at_e0(v)?;
    Ok(inner(&x, &y))
}

/// Gram matrix `S(p_n, p_m)`, `n, m <= max_degree`, of the associated polynomials.
///
/// Evaluated in double-double: the entries of `A` and the coefficients of
/// `p_n` both grow geometrically, and in binary64 the cancellation in
/// `p_n(A) e0` costs up to six digits already at `n = 15`.
pub fn associated_gram(theta: &Pencil, max_degree: usize) -> Result<DMatrix<f64>> {
    let vecs = associated_vectors(theta, max_degree)?;
    Ok(DMatrix::from_fn(max_degree + 1, max_degree + 1, |i, j| {
        inner(&vecs[i], &vecs[j]).re
    }))
}

/// The vectors `p_n(A) e0`, `n <= max_degree`, evaluated in double-double and
/// rounded; each should equal `e_n`.
pub fn associated_vectors(theta: &Pencil, max_degree: usize) -> Result<Vec<Vec<f64>>> {
    let a = build_associated_operator_in::<TwoFloat>(theta, max_degree)?;
    let p = associated_polynomials_in::<TwoFloat>(theta, max_degree)?;
    p.iter()
        .map(|pn| Ok(a.apply_poly_at_e0(pn)?.into_iter().map(to_f64).collect()))
        .collect()
}
