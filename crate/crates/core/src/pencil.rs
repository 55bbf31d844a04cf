//! Banded matrices `J3`, `J5`, the pencil bundle and its associated polynomials.
//!
//! The semi-infinite matrices are stored as finite band vectors together with
//! a [`Tail`] rule. With [`Tail::Constant`] every band repeats its last stored
//! entry forever; with [`Tail::None`] reading past the stored data is an error.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PencilError, Result};
use crate::poly::Poly;
use crate::scalar::{to_f64, Scalar};

/// Extension rule for bands beyond the stored entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// Repeat the last stored entry.
    Constant,
    /// No extension; indexing past the data fails.
    #[default]
    None,
}

fn band_at(band: &'static str, data: &[f64], tail: Tail, k: usize) -> Result<f64> {
    match (data.get(k), tail) {
        (Some(&v), _) => Ok(v),
        (None, Tail::Constant) if !data.is_empty() => Ok(data[data.len() - 1]),
        _ => Err(PencilError::TruncationExceeded {
            band,
            index: k,
            available: data.len(),
        }),
    }
}

fn check_finite(band: &'static str, data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(PencilError::InvalidInput {
            pointer: format!("/{band}/{i}"),
            message: "entry is not finite".into(),
        }),
        None => Ok(()),
    }
}

/// Truncated Jacobi matrix: diagonal `b`, off-diagonal `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiMatrix {
    a: Vec<f64>,
    b: Vec<f64>,
    tail: Tail,
}

impl JacobiMatrix {
    /// Builds a Jacobi matrix from its bands.
    ///
    /// Without a tail rule the diagonal must be one longer than the
    /// off-diagonal. Positivity of `a` is not enforced here; see
    /// [`Pencil::validate`].
    pub fn new(a: Vec<f64>, b: Vec<f64>, tail: Tail) -> Result<Self> {
        check_finite("a", &a)?;
        check_finite("b", &b)?;
        if b.is_empty() {
            return Err(PencilError::InvalidInput {
                pointer: "/b".into(),
                message: "diagonal must not be empty".into(),
            });
        }
        match tail {
            Tail::None if b.len() != a.len() + 1 => Err(PencilError::InvalidInput {
                pointer: "/b".into(),
                message: format!(
                    "diagonal has {} entries but off-diagonal has {} (expected {})",
                    b.len(),
                    a.len(),
                    a.len() + 1
                ),
            }),
            Tail::Constant if a.is_empty() => Err(PencilError::InvalidInput {
                pointer: "/a".into(),
                message: "constant tail needs at least one off-diagonal entry".into(),
            }),
            _ => Ok(JacobiMatrix { a, b, tail }),
        }
    }

    /// Semi-infinite Jacobi matrix with constant bands.
    pub fn constant(a: f64, b: f64) -> Self {
        JacobiMatrix {
            a: vec![a],
            b: vec![b],
            tail: Tail::Constant,
        }
    }

    pub fn a(&self, k: usize) -> Result<f64> {
        band_at("a", &self.a, self.tail, k)
    }

    pub fn b(&self, k: usize) -> Result<f64> {
        band_at("b", &self.b, self.tail, k)
    }

    /// `a_k` with the convention `a_{-1} = 0`.
    pub fn a_signed(&self, k: isize) -> Result<f64> {
        if k < 0 {
            Ok(0.0)
        } else {
            self.a(k as usize)
        }
    }

    pub fn a_band(&self) -> &[f64] {
        &self.a
    }

    pub fn b_band(&self) -> &[f64] {
        &self.b
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Largest diagonal index representable, `None` when the tail is unbounded.
    pub fn max_index(&self) -> Option<usize> {
        match self.tail {
            Tail::Constant => None,
            Tail::None => Some(self.b.len() - 1),
        }
    }

    /// The leading `(n+1) x (n+1)` block as an explicit matrix without tail.
    pub fn truncate(&self, n: usize) -> Result<JacobiMatrix> {
        let a = (0..n).map(|k| self.a(k)).collect::<Result<Vec<_>>>()?;
        let b = (0..=n).map(|k| self.b(k)).collect::<Result<Vec<_>>>()?;
        Ok(JacobiMatrix {
            a,
            b,
            tail: Tail::None,
        })
    }

    /// Dense `size x size` leading block.
    pub fn dense(&self, size: usize) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(size, size);
        for i in 0..size {
            m[(i, i)] = self.b(i)?;
            if i + 1 < size {
                let a = self.a(i)?;
                m[(i, i + 1)] = a;
                m[(i + 1, i)] = a;
            }
        }
        Ok(m)
    }

    /// Product `J3 v` for a finite vector; the result is one entry longer.
    pub fn apply<T: Scalar>(&self, v: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); v.len() + 1];
        for (n, &x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            if n > 0 {
                out[n - 1] += x.scale(self.a(n - 1)?);
            }
            out[n] += x.scale(self.b(n)?);
            out[n + 1] += x.scale(self.a(n)?);
        }
        Ok(out)
    }

    /// Orthonormal polynomials `r_0, ..., r_n` of the three-term recurrence
    /// `x r_k = a_{k-1} r_{k-1} + b_k r_k + a_k r_{k+1}`, `r_0 = 1`.
    pub fn orthonormal_polys(&self, n: usize) -> Result<Vec<Poly>> {
        self.orthonormal_polys_in(n)
    }

    /// [`JacobiMatrix::orthonormal_polys`] carried out in the scalar type `T`.
    pub fn orthonormal_polys_in<T: Scalar>(&self, n: usize) -> Result<Vec<Poly<T>>> {
        let mut out: Vec<Poly<T>> = Vec::with_capacity(n + 1);
        out.push(Poly::one());
        for k in 0..n {
            let ak = self.a(k)?;
            if ak <= 0.0 {
                return Err(PencilError::InvalidPencil(format!(
                    "a_{k} = {ak} is not positive"
                )));
            }
            let mut next = out[k]
                .shift_up()
                .sub(&out[k].scale(T::from_real(self.b(k)?)));
            if k > 0 {
                next = next.sub(&out[k - 1].scale(T::from_real(self.a(k - 1)?)));
            }
            out.push(next.div_real(ak));
        }
        Ok(out)
    }

    /// Upper bound on `|x|` over the spectrum from Gershgorin discs of the
    /// stored rows (a tail row repeats the last stored one).
    pub fn gershgorin_radius(&self) -> f64 {
        let rows = match self.tail {
            Tail::Constant => self.a.len().max(self.b.len()) + 1,
            Tail::None => self.b.len(),
        };
        let mut radius: f64 = 0.0;
        for n in 0..rows {
            let b = self.b(n).unwrap_or(0.0);
            let left = if n > 0 {
                self.a(n - 1).unwrap_or(0.0).abs()
            } else {
                0.0
            };
            let right = self.a(n).unwrap_or(0.0).abs();
            radius = radius
                .max((b - left - right).abs())
                .max((b + left + right).abs());
        }
        radius
    }
}

/// Truncated real symmetric five-diagonal matrix, upper triangle stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FiveDiagMatrix {
    alpha5: Vec<f64>,
    beta5: Vec<f64>,
    gamma5: Vec<f64>,
    tail: Tail,
}

impl FiveDiagMatrix {
    /// `alpha5` is the diagonal, `beta5` the first and `gamma5` the second
    /// off-diagonal.
    pub fn new(alpha5: Vec<f64>, beta5: Vec<f64>, gamma5: Vec<f64>, tail: Tail) -> Result<Self> {
        check_finite("alpha5", &alpha5)?;
        check_finite("beta5", &beta5)?;
        check_finite("gamma5", &gamma5)?;
        if alpha5.is_empty() {
            return Err(PencilError::InvalidInput {
                pointer: "/alpha5".into(),
                message: "diagonal must not be empty".into(),
            });
        }
        match tail {
            Tail::None => {
                let n = alpha5.len();
                if beta5.len() + 1 != n {
                    return Err(PencilError::InvalidInput {
                        pointer: "/beta5".into(),
                        message: format!("expected {} entries, found {}", n - 1, beta5.len()),
                    });
                }
                if gamma5.len() != n.saturating_sub(2) {
                    return Err(PencilError::InvalidInput {
                        pointer: "/gamma5".into(),
                        message: format!(
                            "expected {} entries, found {}",
                            n.saturating_sub(2),
                            gamma5.len()
                        ),
                    });
                }
            }
            Tail::Constant => {
                if beta5.is_empty() || gamma5.is_empty() {
                    return Err(PencilError::InvalidInput {
                        pointer: if beta5.is_empty() {
                            "/beta5"
                        } else {
                            "/gamma5"
                        }
                        .into(),
                        message: "constant tail needs at least one entry per band".into(),
                    });
                }
            }
        }
        Ok(FiveDiagMatrix {
            alpha5,
            beta5,
            gamma5,
            tail,
        })
    }

    pub fn alpha(&self, n: usize) -> Result<f64> {
        band_at("alpha5", &self.alpha5, self.tail, n)
    }

    pub fn beta(&self, n: usize) -> Result<f64> {
        band_at("beta5", &self.beta5, self.tail, n)
    }

    pub fn gamma(&self, n: usize) -> Result<f64> {
        band_at("gamma5", &self.gamma5, self.tail, n)
    }

    /// `beta_n` with `beta_{-1} = 0`.
    pub fn beta_signed(&self, n: isize) -> Result<f64> {
        if n < 0 {
            Ok(0.0)
        } else {
            self.beta(n as usize)
        }
    }

    /// `gamma_n` with `gamma_{-1} = gamma_{-2} = 0`.
    pub fn gamma_signed(&self, n: isize) -> Result<f64> {
        if n < 0 {
            Ok(0.0)
        } else {
            self.gamma(n as usize)
        }
    }

    pub fn alpha_band(&self) -> &[f64] {
        &self.alpha5
    }

    pub fn beta_band(&self) -> &[f64] {
        &self.beta5
    }

    pub fn gamma_band(&self) -> &[f64] {
        &self.gamma5
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Entry `(i, j)` of the symmetric matrix.
    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.alpha(lo),
            1 => self.beta(lo),
            2 => self.gamma(lo),
            _ => Ok(0.0),
        }
    }

    pub fn dense(&self, size: usize) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(size, size);
        for i in 0..size {
            for j in i.saturating_sub(2)..(i + 3).min(size) {
                m[(i, j)] = self.entry(i, j)?;
            }
        }
        Ok(m)
    }

    /// Column `J5 e_n` as a vector of length `n + 3`.
    pub fn column(&self, n: usize) -> Result<Vec<f64>> {
        let mut w = vec![0.0; n + 3];
        if n >= 2 {
            w[n - 2] = self.gamma(n - 2)?;
        }
        if n >= 1 {
            w[n - 1] = self.beta(n - 1)?;
        }
        w[n] = self.alpha(n)?;
        w[n + 1] = self.beta(n)?;
        w[n + 2] = self.gamma(n)?;
        Ok(w)
    }
}

/// A Jacobi-type pencil `(J3, J5, alpha, beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    pub j3: JacobiMatrix,
    pub j5: FiveDiagMatrix,
    pub alpha: f64,
    pub beta: f64,
}

/// A single reason why a pencil is not a Jacobi-type pencil.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    ANotPositive { index: usize, value: f64 },
    GammaNotPositive { index: usize, value: f64 },
    AlphaNotPositive { value: f64 },
    BetaNotFinite { value: f64 },
}

impl Violation {
    pub fn pointer(&self) -> String {
        match self {
            Violation::ANotPositive { index, .. } => format!("/a/{index}"),
            Violation::GammaNotPositive { index, .. } => format!("/gamma5/{index}"),
            Violation::AlphaNotPositive { .. } => "/alpha".into(),
            Violation::BetaNotFinite { .. } => "/beta".into(),
        }
    }
}

impl Pencil {
    pub fn new(j3: JacobiMatrix, j5: FiveDiagMatrix, alpha: f64, beta: f64) -> Self {
        Pencil {
            j3,
            j5,
            alpha,
            beta,
        }
    }

    /// Lists every violation of the Jacobi-type pencil conditions among the
    /// stored entries; an empty list means the pencil is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (index, &value) in self.j3.a_band().iter().enumerate() {
            if value <= 0.0 {
                out.push(Violation::ANotPositive { index, value });
            }
        }
        for (index, &value) in self.j5.gamma_band().iter().enumerate() {
            if value <= 0.0 {
                out.push(Violation::GammaNotPositive { index, value });
            }
        }
        if !(self.alpha > 0.0) {
            out.push(Violation::AlphaNotPositive { value: self.alpha });
        }
        if !self.beta.is_finite() {
            out.push(Violation::BetaNotFinite { value: self.beta });
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Number of band entries past the stored data that are read when the
    /// bands are accessed up to index `max_index`.
    pub fn tail_usage(&self, max_index: usize) -> usize {
        let beyond = |len: usize| (max_index + 1).saturating_sub(len);
        beyond(self.j3.a_band().len())
            + beyond(self.j3.b_band().len())
            + beyond(self.j5.alpha_band().len())
            + beyond(self.j5.beta_band().len())
            + beyond(self.j5.gamma_band().len())
    }

    /// The classical embedding of a Jacobi matrix: `J5 = J3^2`,
    /// `alpha = 1/a_0`, `beta = -b_0/a_0`.
    pub fn classical(j3: &JacobiMatrix, rows: usize) -> Result<Pencil> {
        let a0 = j3.a(0)?;
        let b0 = j3.b(0)?;
        let j5 = square_jacobi(j3, rows)?;
        Ok(Pencil::new(j3.clone(), j5, 1.0 / a0, -b0 / a0))
    }
}

/// Associated polynomials `p_0, ..., p_n` from the five-term recurrence
/// `(J5 - lambda J3) p(lambda) = 0`, `p_0 = 1`, `p_1 = alpha lambda + beta`.
pub fn associated_polynomials(theta: &Pencil, n: usize) -> Result<Vec<Poly>> {
    associated_polynomials_in(theta, n)
}

/// [`associated_polynomials`] carried out in the scalar type `T`.
pub fn associated_polynomials_in<T: Scalar>(theta: &Pencil, n: usize) -> Result<Vec<Poly<T>>> {
    if !(theta.alpha > 0.0) {
        return Err(PencilError::InvalidPencil(format!(
            "alpha = {} is not positive",
            theta.alpha
        )));
    }
    let lin = |c0: f64, c1: f64| Poly::new(vec![T::from_real(c0), T::from_real(-c1)]);
    let mut p: Vec<Poly<T>> = Vec::with_capacity(n + 1);
    p.push(Poly::one());
    if n >= 1 {
        p.push(Poly::new(vec![
            T::from_real(theta.beta),
            T::from_real(theta.alpha),
        ]));
    }
    let j3 = &theta.j3;
    let j5 = &theta.j5;
    for m in 2..=n {
        // row k = m - 2 of (J5 - lambda J3) p = 0 solved for p_{k+2}
        let k = m - 2;
        let gamma = j5.gamma(k)?;
        if gamma <= 0.0 {
            return Err(PencilError::GammaNotPositive {
                index: k,
                value: gamma,
            });
        }
        let mut rhs = Poly::zero();
        if k >= 2 {
            rhs = rhs.add(&p[k - 2].scale(T::from_real(j5.gamma(k - 2)?)));
        }
        if k >= 1 {
            rhs = rhs.add(&lin(j5.beta(k - 1)?, j3.a(k - 1)?).mul(&p[k - 1]));
        }
        rhs = rhs.add(&lin(j5.alpha(k)?, j3.b(k)?).mul(&p[k]));
        rhs = rhs.add(&lin(j5.beta(k)?, j3.a(k)?).mul(&p[k + 1]));
        let next = rhs.div_real(-gamma);
        match (next.degree(), next.leading()) {
            (Some(d), Some(lead)) if d == m && to_f64(lead) > 0.0 => p.push(next),
            _ => {
                return Err(PencilError::InvalidPencil(format!(
                    "p_{m} does not have degree {m} with positive leading coefficient"
                )))
            }
        }
    }
    Ok(p)
}

/// Band formulas for `J3^2` with rows `0..=rows`.
///
/// With a constant tail on `J3` the square is computed far enough that its
/// own constant tail is exact.
pub fn square_jacobi(j3: &JacobiMatrix, rows: usize) -> Result<FiveDiagMatrix> {
    scaled_square(j3, rows, 1.0, 0.0, 0.0)
}

/// `scale J3^2 + linear J3 + corner diag(1, 0, 0, ...)` as a five-diagonal matrix.
pub(crate) fn scaled_square(
    j3: &JacobiMatrix,
    rows: usize,
    scale: f64,
    linear: f64,
    corner: f64,
) -> Result<FiveDiagMatrix> {
    let rows = match j3.tail() {
        Tail::Constant => rows.max(j3.a_band().len().max(j3.b_band().len()) + 2),
        Tail::None => rows,
    };
    let mut alpha5 = Vec::with_capacity(rows + 1);
    let mut beta5 = Vec::with_capacity(rows);
    let mut gamma5 = Vec::with_capacity(rows.saturating_sub(1));
    for n in 0..=rows {
        let a_prev = j3.a_signed(n as isize - 1)?;
        let a_n = j3.a(n)?;
        let b_n = j3.b(n)?;
        let mut diag = scale * (a_prev * a_prev + b_n * b_n + a_n * a_n) + linear * b_n;
        if n == 0 {
            diag += corner;
        }
        alpha5.push(diag);
        if n < rows {
            beta5.push(scale * a_n * (b_n + j3.b(n + 1)?) + linear * a_n);
        }
        if n + 1 < rows {
            gamma5.push(scale * a_n * j3.a(n + 1)?);
        }
    }
    FiveDiagMatrix::new(alpha5, beta5, gamma5, j3.tail())
}

/// `(J5 - lambda J3) v` for a finite vector `v`; the result has two more entries.
pub fn pencil_apply(theta: &Pencil, lambda: Complex64, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len() + 2];
    for (n, &x) in v.iter().enumerate() {
        if x == Complex64::new(0.0, 0.0) {
            continue;
        }
        let w = theta.j5.column(n)?;
        for (i, &wi) in w.iter().enumerate().skip(n.saturating_sub(2)) {
            out[i] += x * wi;
        }
        if n > 0 {
            out[n - 1] -= lambda * x * theta.j3.a(n - 1)?;
        }
        out[n] -= lambda * x * theta.j3.b(n)?;
        out[n + 1] -= lambda * x * theta.j3.a(n)?;
    }
    Ok(out)
}
