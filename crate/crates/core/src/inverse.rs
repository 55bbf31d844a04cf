//! Model representation of a pencil in `L2(sigma)` and reconstruction of a
//! pencil from a measure and an admissible operator.
//!
//! The operator `𝒜 = U A U^{-1}` acts on polynomials and is stored by its
//! action on monomials: column `k` of `ξ` holds the coefficients of `𝒜 x^k`.
//! Passing between monomials and the orthonormal basis `r_n` is badly
//! conditioned, so every conversion runs in double-double:
//!
//! * monomial coefficients of `r_n` come from the three-term recurrence;
//! * coordinates of `x^i` in the `r`-basis are `J3^i e0`, so no triangular
//!   matrix is ever inverted;
//! * inner products use Parseval's identity in the `r`-basis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{PencilError, Result};
use crate::measure::Measure;
use crate::operator::{build_associated_operator_in, Basis, OperatorMatrix};
use crate::pencil::{FiveDiagMatrix, JacobiMatrix, Pencil, Tail};
use crate::poly::{ComplexPoly, Poly};
use crate::scalar::{to_f64, Scalar};

type Dd = TwoFloat;

/// Agreement required between a measure's recurrence and the pencil's `J3`.
pub const MEASURE_MATCH_TOL: f64 = 1e-8;
/// Relative tolerance for the symmetry of `T` and for band structure.
pub const STRUCTURE_TOL: f64 = 1e-9;
/// Largest accepted entry of `R G - I`, the round trip between bases.
pub const BASIS_RESIDUAL_TOL: f64 = 1e-12;

/// The orthonormal basis `r_0..r_d` of a Jacobi matrix with the coordinates
/// `J3^i e0` of the monomials.
struct RBasis {
    r: Vec<Poly<Dd>>,
    g: Vec<Vec<Dd>>,
}

impl RBasis {
    fn new(j: &JacobiMatrix, d: usize) -> Result<RBasis> {
        let r = j.orthonormal_polys_in::<Dd>(d)?;
        let mut g = Vec::with_capacity(d + 1);
        g.push(vec![Dd::one()]);
        for i in 0..d {
            let next = j.apply(&g[i])?;
            g.push(next);
        }
        Ok(RBasis { r, g })
    }

    fn degree(&self) -> usize {
        self.r.len() - 1
    }

    /// Coordinates in the `r`-basis of the polynomial with monomial coefficients `p`.
    fn coords(&self, p: &[Dd]) -> Result<Vec<Dd>> {
        if p.len() > self.r.len() {
            return Err(PencilError::DegreeBudgetExceeded {
                requested: p.len() - 1,
                budget: self.degree(),
            });
        }
        let mut c = vec![Dd::zero(); p.len()];
        for (i, &pi) in p.iter().enumerate() {
            for (j, &gij) in self.g[i].iter().enumerate() {
                c[j] += pi * gij;
            }
        }
        Ok(c)
    }

    /// Monomial coefficients of `sum_j c_j r_j`.
    fn expand(&self, c: &[Dd]) -> Vec<Dd> {
        let mut p = vec![Dd::zero(); c.len()];
        for (j, &cj) in c.iter().enumerate() {
            for (k, &rk) in self.r[j].coeffs().iter().enumerate() {
                p[k] += cj * rk;
            }
        }
        p
    }

    /// Largest entry of `R G - I` over the stored degrees.
    fn residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, gi) in self.g.iter().enumerate() {
            let p = self.expand(gi);
            for (k, &v) in p.iter().enumerate() {
                let target = if k == i { Dd::one() } else { Dd::zero() };
                worst = worst.max(to_f64(v - target).abs());
            }
        }
        worst
    }
}

/// `𝒜` in the monomial basis together with its measure.
///
/// Operators computed by [`model_representation`] keep their double-double
/// entries; [`ModelOperator::xi`] is the rounded view.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOperator {
    xi: OperatorMatrix,
    xi_dd: OperatorMatrix<Dd>,
    measure: Measure,
}

impl ModelOperator {
    pub fn new(xi: OperatorMatrix, measure: Measure) -> Result<Self> {
        if xi.basis() != Basis::Monomial {
            return Err(PencilError::InvalidInput {
                pointer: "/columns".into(),
                message: "model operator needs a monomial-basis matrix".into(),
            });
        }
        let cols = xi
            .columns()
            .iter()
            .map(|c| c.iter().map(|&v| Dd::from(v)).collect())
            .collect();
        let xi_dd = OperatorMatrix::new(cols, Basis::Monomial)?;
        Ok(ModelOperator { xi, xi_dd, measure })
    }

    fn from_dd(xi_dd: OperatorMatrix<Dd>, measure: Measure) -> Self {
        ModelOperator {
            xi: xi_dd.to_f64(),
            xi_dd,
            measure,
        }
    }

    pub fn xi(&self) -> &OperatorMatrix {
        &self.xi
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    fn apply_dd(&self, p: &[Dd]) -> Result<Vec<Dd>> {
        let mut out = vec![Dd::zero(); p.len() + 1];
        for (k, &pk) in p.iter().enumerate() {
            if pk.is_zero() {
                continue;
            }
            for (j, &x) in self.xi_dd.column(k)?.iter().enumerate() {
                out[j] += pk * x;
            }
        }
        Ok(out)
    }

    fn poly_at_one_dd(&self, u: &Poly) -> Result<Vec<Dd>> {
        let Some(d) = u.degree() else {
            return Ok(vec![Dd::zero()]);
        };
        let mut y = vec![Dd::from(u.coeff(d))];
        for k in (0..d).rev() {
            y = self.apply_dd(&y)?;
            y[0] += Dd::from(u.coeff(k));
        }
        Ok(y)
    }

    /// The polynomial `u(𝒜)[1]`, evaluated by Horner's scheme on `ξ`.
    pub fn apply_poly_at_one(&self, u: &Poly) -> Result<Poly> {
        Ok(Poly::new(
            self.poly_at_one_dd(u)?.into_iter().map(to_f64).collect(),
        ))
    }
}

/// The model representation `𝒜_σ` with columns `0..=n+1`.
///
/// `m` must generate `theta.j3`: its recurrence coefficients up to index
/// `n + 2` have to agree with the pencil's within [`MEASURE_MATCH_TOL`].
pub fn model_representation(theta: &Pencil, m: &Measure, n: usize) -> Result<ModelOperator> {
    let jm = m.jacobi_from_measure(n + 2)?;
    let close = |x: f64, y: f64| (x - y).abs() <= MEASURE_MATCH_TOL * x.abs().max(1.0);
    for k in 0..=n + 1 {
        let (x, y) = (jm.a(k)?, theta.j3.a(k)?);
        if !close(x, y) {
            return Err(PencilError::MeasureMismatch(format!(
                "a_{k}: measure {x}, pencil {y}"
            )));
        }
    }
    for k in 0..=n + 2 {
        let (x, y) = (jm.b(k)?, theta.j3.b(k)?);
        if !close(x, y) {
            return Err(PencilError::MeasureMismatch(format!(
                "b_{k}: measure {x}, pencil {y}"
            )));
        }
    }
    let basis = RBasis::new(&theta.j3, n + 2)?;
    let residual = basis.residual();
    if !(residual <= BASIS_RESIDUAL_TOL) {
        return Err(PencilError::NumericalFailure(format!(
            "monomial/orthonormal basis round trip lost accuracy (residual {residual:e})"
        )));
    }
    let f = build_associated_operator_in::<Dd>(theta, n + 1)?;
    let mut cols = Vec::with_capacity(n + 2);
    for k in 0..=n + 1 {
        let coords = f.apply(&basis.g[k])?;
        cols.push(basis.expand(&coords));
    }
    Ok(ModelOperator::from_dd(
        OperatorMatrix::new(cols, Basis::Monomial)?,
        m.clone(),
    ))
}

/// The matrix `T_{mn} = <𝒜 Λ0 r_n, r_m>` for `m, n <= n_max`.
pub fn gram_t(op: &ModelOperator, n_max: usize) -> Result<DMatrix<f64>> {
    let j = op.measure.jacobi_from_measure(n_max + 2)?;
    let basis = RBasis::new(&j, n_max + 2)?;
    let mut t = DMatrix::zeros(n_max + 1, n_max + 1);
    for n in 0..=n_max {
        let mut x_rn = vec![Dd::zero()];
        x_rn.extend_from_slice(basis.r[n].coeffs());
        let image = op.apply_dd(&x_rn)?;
        let c = basis.coords(&image)?;
        for m in 0..=n_max {
            t[(m, n)] = c.get(m).map_or(0.0, |&v| to_f64(v));
        }
    }
    Ok(t)
}

/// Outcome of the three admissibility conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// `𝒜` is defined on all polynomials; true by construction.
    pub domain: bool,
    /// `ξ_{k,k+1} > 0` for every stored column.
    pub leading_positive: bool,
    /// Columns whose leading entry is not positive.
    pub leading_failures: Vec<usize>,
    /// `𝒜 Λ0` is symmetric on `r_0..r_n`.
    pub symmetric: bool,
    /// `max |T_mn - T_nm|`.
    pub symmetry_defect: f64,
    /// Tolerance the defect was compared against.
    pub symmetry_tol: f64,
    /// Index pair attaining the defect.
    pub worst_pair: Option<(usize, usize)>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.domain && self.leading_positive && self.symmetric
    }
}

pub fn check_admissibility(op: &ModelOperator, n: usize) -> Result<AdmissibilityReport> {
    let leading_failures: Vec<usize> = (0..op.xi.size())
        .filter(|&k| !(op.xi.leading(k) > 0.0))
        .collect();
    let t = gram_t(op, n)?;
    let scale = t.amax();
    let mut defect = 0.0;
    let mut worst_pair = None;
    for m in 0..=n {
        for k in m + 1..=n {
            let d = (t[(m, k)] - t[(k, m)]).abs();
            if d > defect {
                defect = d;
                worst_pair = Some((m, k));
            }
        }
    }
    let tol = STRUCTURE_TOL * scale;
    Ok(AdmissibilityReport {
        domain: true,
        leading_positive: leading_failures.is_empty(),
        leading_failures,
        symmetric: defect <= tol,
        symmetry_defect: defect,
        symmetry_tol: tol,
        worst_pair,
    })
}

/// The pencil whose model representation is `op`, with bands up to index `n`.
pub fn reconstruct_pencil(op: &ModelOperator, n: usize) -> Result<Pencil> {
    let budget = op.measure.degree_budget();
    if n.saturating_add(2) > budget {
        return Err(PencilError::DegreeBudgetExceeded {
            requested: n + 2,
            budget,
        });
    }
    let report = check_admissibility(op, n)?;
    if !report.leading_positive {
        return Err(PencilError::NotAdmissible(format!(
            "xi_(k,k+1) <= 0 at k = {:?}",
            report.leading_failures
        )));
    }
    if !report.symmetric {
        return Err(PencilError::NotAdmissible(format!(
            "A Lambda0 is not symmetric: defect {:e} at {:?}",
            report.symmetry_defect, report.worst_pair
        )));
    }
    let t = gram_t(op, n)?;
    let tol = STRUCTURE_TOL * t.amax();
    for col in 0..=n {
        for row in 0..=n {
            if row.abs_diff(col) > 2 && t[(row, col)].abs() > tol {
                return Err(PencilError::NotFiveDiagonal {
                    row,
                    col,
                    value: t[(row, col)],
                });
            }
        }
    }
    let alpha5: Vec<f64> = (0..=n).map(|k| t[(k, k)]).collect();
    let beta5: Vec<f64> = (0..n).map(|k| t[(k + 1, k)]).collect();
    let gamma5: Vec<f64> = (0..n.saturating_sub(1)).map(|k| t[(k + 2, k)]).collect();
    if let Some((index, &value)) = gamma5.iter().enumerate().find(|(_, &g)| !(g > 0.0)) {
        return Err(PencilError::GammaNotPositive { index, value });
    }
    let j3 = op.measure.jacobi_from_measure(n)?;
    let moments = op.measure.moments(2)?;
    let s1 = moments.as_slice()[1];
    let delta1 = moments.hankel(1)?;
    if !(delta1 > 0.0) {
        return Err(PencilError::MeasureDegenerate(format!(
            "Delta_1 = {delta1}"
        )));
    }
    let xi00 = op.xi.entry(0, 0);
    let xi01 = op.xi.entry(1, 0);
    let denom = xi01 * delta1.sqrt();
    let alpha = 1.0 / denom;
    let beta = -(xi01 * s1 + xi00) / denom;
    Ok(Pencil::new(
        j3,
        FiveDiagMatrix::new(alpha5, beta5, gamma5, Tail::None)?,
        alpha,
        beta,
    ))
}

/// `S(u, v) = ∫ u(𝒜)(1) conj(v(𝒜)(1)) dσ`, integrated through the
/// orthonormal coordinates of both polynomials.
///
/// For `u == v` a value `<= 1e-12` flags a degenerate measure.
pub fn integral_spectral_function(
    op: &ModelOperator,
    u: &ComplexPoly,
    v: &ComplexPoly,
) -> Result<Complex64> {
    let d = u.degree().unwrap_or(0).max(v.degree().unwrap_or(0));
    let j = op.measure.jacobi_from_measure(d)?;
    let basis = RBasis::new(&j, d)?;
    let coords = |w: &ComplexPoly| -> Result<(Vec<Dd>, Vec<Dd>)> {
        let re = basis.coords(&op.poly_at_one_dd(&w.re())?)?;
        let im = basis.coords(&op.poly_at_one_dd(&w.im())?)?;
        Ok((re, im))
    };
    let (ur, ui) = coords(u)?;
    let (vr, vi) = coords(v)?;
    let dot = |x: &[Dd], y: &[Dd]| {
        x.iter()
            .zip(y)
            .fold(Dd::zero(), |acc, (&a, &b)| acc + a * b)
    };
    // (ur + i ui)(vr - i vi)
    let re = dot(&ur, &vr) + dot(&ui, &vi);
    let im = dot(&ui, &vr) - dot(&ur, &vi);
    let s = Complex64::new(to_f64(re), to_f64(im));
    if u == v && !u.is_zero() && s.re <= 1e-12 {
        return Err(PencilError::MeasureDegenerate(format!(
            "S(u, u) = {:e} for a nonzero polynomial",
            s.re
        )));
    }
    Ok(s)
}

/// Monomial coefficients `a_{n,j}` of `𝒜^n [1]`; `a_{n,n} > 0` is asserted.
pub fn monic_expansion_check(op: &ModelOperator, n: usize) -> Result<Vec<f64>> {
    let mut y = vec![Dd::one()];
    for _ in 0..n {
        y = op.apply_dd(&y)?;
    }
    let out: Vec<f64> = y.into_iter().map(to_f64).collect();
    if !(out[n] > 0.0) {
        return Err(PencilError::NumericalFailure(format!(
            "leading coefficient of A^{n}[1] is {} (expected > 0)",
            out[n]
        )));
    }
    Ok(out)
}
