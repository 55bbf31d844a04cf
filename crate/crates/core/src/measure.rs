//! Orthogonality measures: moments, Hankel determinants, Gauss rules and the
//! recurrence coefficients of their orthonormal polynomials.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{PencilError, Result};
use crate::linalg::{golub_welsch, lu_det};
use crate::pencil::{JacobiMatrix, Tail};
use crate::poly::Poly;

/// Smallest recurrence coefficient accepted by the Stieltjes procedure.
pub const MIN_RECURRENCE_COEFF: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    /// Finitely many atoms `(node, weight)`, sorted by node.
    Atoms(Vec<(f64, f64)>),
    /// The `order`-point Gauss rule of a Jacobi matrix.
    JacobiGenerated { jacobi: JacobiMatrix, order: usize },
    /// Density `(1/pi) sqrt(1 - ((x - center)/2)^2)` on `[center - 2, center + 2]`.
    ChebyshevU { center: f64 },
}

/// A probability measure on the real line with computable moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    kind: MeasureKind,
    degree_budget: usize,
    normalization: f64,
    rule: Option<Vec<(f64, f64)>>,
}

impl Measure {
    /// Finitely supported measure; weights are rescaled to total mass one.
    pub fn atoms(points: Vec<(f64, f64)>) -> Result<Measure> {
        if points.is_empty() {
            return Err(PencilError::InvalidInput {
                pointer: "/points".into(),
                message: "at least one atom is required".into(),
            });
        }
        for (i, &(x, w)) in points.iter().enumerate() {
            if !x.is_finite() {
                return Err(PencilError::InvalidInput {
                    pointer: format!("/points/{i}/0"),
                    message: "node is not finite".into(),
                });
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(PencilError::InvalidInput {
                    pointer: format!("/points/{i}/1"),
                    message: format!("weight {w} is not strictly positive"),
                });
            }
        }
        let mut points = points;
        points.sort_by(|p, q| p.0.total_cmp(&q.0));
        if let Some(i) = points.windows(2).position(|w| w[0].0 == w[1].0) {
            return Err(PencilError::InvalidInput {
                pointer: "/points".into(),
                message: format!("duplicate node {}", points[i].0),
            });
        }
        let total: f64 = points.iter().map(|p| p.1).sum();
        let rule: Vec<(f64, f64)> = points.iter().map(|&(x, w)| (x, w / total)).collect();
        Ok(Measure {
            degree_budget: rule.len() - 1,
            kind: MeasureKind::Atoms(rule.clone()),
            normalization: total,
            rule: Some(rule),
        })
    }

    /// The `order`-point Gauss rule of `jacobi`.
    pub fn jacobi(jacobi: JacobiMatrix, order: usize) -> Result<Measure> {
        if order == 0 {
            return Err(PencilError::InvalidParameter(
                "quadrature order must be positive".into(),
            ));
        }
        for k in 0..order - 1 {
            let a = jacobi.a(k)?;
            if a <= 0.0 {
                return Err(PencilError::InvalidInput {
                    pointer: format!("/a/{k}"),
                    message: format!("a_{k} = {a} is not positive"),
                });
            }
        }
        let rule = golub_welsch(&jacobi, order)?;
        Ok(Measure {
            kind: MeasureKind::JacobiGenerated { jacobi, order },
            degree_budget: order - 1,
            normalization: 1.0,
            rule: Some(rule),
        })
    }

    pub fn chebyshev_u(center: f64) -> Result<Measure> {
        if !center.is_finite() {
            return Err(PencilError::InvalidInput {
                pointer: "/center".into(),
                message: "center is not finite".into(),
            });
        }
        Ok(Measure {
            kind: MeasureKind::ChebyshevU { center },
            degree_budget: usize::MAX,
            normalization: 1.0,
            rule: None,
        })
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    /// Largest polynomial degree `n` for which the Gram matrix of
    /// `1, x, ..., x^n` is positive definite (`usize::MAX` when unbounded).
    pub fn degree_budget(&self) -> usize {
        self.degree_budget
    }

    /// Factor by which the supplied weights were divided.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Atoms of a finitely supported measure.
    pub fn atoms_rule(&self) -> Option<&[(f64, f64)]> {
        self.rule.as_deref()
    }

    pub fn size(&self) -> Option<usize> {
        self.rule.as_ref().map(Vec::len)
    }

    /// Density of a `ChebyshevU` measure; `None` for atomic measures.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self.kind {
            MeasureKind::ChebyshevU { center } => {
                let t = (x - center) / 2.0;
                Some(if t.abs() < 1.0 {
                    (1.0 - t * t).sqrt() / std::f64::consts::PI
                } else {
                    0.0
                })
            }
            _ => None,
        }
    }

    fn check_moment_order(&self, k: usize) -> Result<()> {
        let limit = self.degree_budget.saturating_mul(2);
        if k > limit {
            return Err(PencilError::DegreeBudgetExceeded {
                requested: k,
                budget: self.degree_budget,
            });
        }
        Ok(())
    }

    /// Quadrature nodes and weights that integrate polynomials of degree
    /// `degree` exactly against this measure.
    pub fn quadrature_for_degree(&self, degree: usize) -> Result<Vec<(f64, f64)>> {
        match (&self.kind, &self.rule) {
            (_, Some(rule)) => {
                self.check_moment_order(degree)?;
                Ok(rule.clone())
            }
            (MeasureKind::ChebyshevU { center }, None) => {
                golub_welsch(&JacobiMatrix::constant(1.0, *center), degree / 2 + 1)
            }
            _ => unreachable!("atomic measures always carry their rule"),
        }
    }

    /// Power moments `s_0, ..., s_k`.
    pub fn moments(&self, k: usize) -> Result<MomentTable> {
        self.check_moment_order(k)?;
        let rule = self.quadrature_for_degree(k)?;
        let mut s = vec![0.0; k + 1];
        for &(x, w) in &rule {
            let mut power = w;
            for sj in s.iter_mut() {
                *sj += power;
                power *= x;
            }
        }
        Ok(MomentTable { s })
    }

    /// `N`-point Gauss rule as an atomic measure.
    pub fn gauss_rule(&self, n: usize) -> Result<Measure> {
        if n == 0 {
            return Err(PencilError::InvalidParameter(
                "Gauss rule of order 0".into(),
            ));
        }
        let rule = match &self.kind {
            MeasureKind::Atoms(points) => {
                if n == points.len() {
                    return Ok(self.clone());
                }
                if n > points.len() {
                    return Err(PencilError::DegreeBudgetExceeded {
                        requested: n,
                        budget: self.degree_budget,
                    });
                }
                golub_welsch(&stieltjes(points, n - 1)?, n)?
            }
            MeasureKind::JacobiGenerated { jacobi, order } => {
                if n > *order {
                    return Err(PencilError::DegreeBudgetExceeded {
                        requested: n,
                        budget: self.degree_budget,
                    });
                }
                golub_welsch(jacobi, n)?
            }
            MeasureKind::ChebyshevU { center } => {
                golub_welsch(&JacobiMatrix::constant(1.0, *center), n)?
            }
        };
        Measure::atoms(rule)
    }

    /// Recurrence coefficients `a_0..a_{N-1}`, `b_0..b_N` of the orthonormal
    /// polynomials of this measure.
    ///
    /// Measures that are defined through a recurrence (`ChebyshevU`,
    /// `JacobiGenerated`) return it directly; atomic measures run the
    /// discretized Stieltjes procedure.
    pub fn jacobi_from_measure(&self, n: usize) -> Result<JacobiMatrix> {
        if n > self.degree_budget {
            return Err(PencilError::DegreeBudgetExceeded {
                requested: n,
                budget: self.degree_budget,
            });
        }
        match &self.kind {
            MeasureKind::ChebyshevU { center } => {
                JacobiMatrix::new(vec![1.0; n], vec![*center; n + 1], Tail::None)
            }
            MeasureKind::JacobiGenerated { jacobi, .. } => jacobi.truncate(n),
            MeasureKind::Atoms(points) => stieltjes(points, n),
        }
    }

    /// Orthonormal polynomials `r_0, ..., r_N` with positive leading coefficients.
    pub fn orthonormal_polys(&self, n: usize) -> Result<Vec<Poly>> {
        self.jacobi_from_measure(n)?.orthonormal_polys(n)
    }

    /// `int f dsigma` for a polynomial integrand of degree at most `degree`.
    pub fn integrate<F>(&self, degree: usize, f: F) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        let rule = self.quadrature_for_degree(degree)?;
        Ok(rule
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &(x, w)| acc + f(x) * w))
    }
}

/// Discretized Stieltjes procedure in orthonormal form on a probability rule.
pub fn stieltjes(rule: &[(f64, f64)], n: usize) -> Result<JacobiMatrix> {
    if n >= rule.len() {
        return Err(PencilError::DegreeBudgetExceeded {
            requested: n,
            budget: rule.len() - 1,
        });
    }
    let m = rule.len();
    let mut q_prev = vec![0.0; m];
    let mut q = vec![1.0; m];
    let mut a: Vec<f64> = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let bk: f64 = rule
            .iter()
            .zip(&q)
            .map(|(&(x, w), &qi)| w * x * qi * qi)
            .sum();
        b.push(bk);
        if k == n {
            break;
        }
        let a_prev = if k > 0 { a[k - 1] } else { 0.0 };
        let v: Vec<f64> = rule
            .iter()
            .zip(q.iter().zip(&q_prev))
            .map(|(&(x, _), (&qi, &pi))| (x - bk) * qi - a_prev * pi)
            .collect();
        let ak = rule
            .iter()
            .zip(&v)
            .map(|(&(_, w), &vi)| w * vi * vi)
            .sum::<f64>()
            .sqrt();
        if !(ak > MIN_RECURRENCE_COEFF) {
            return Err(PencilError::MeasureDegenerate(format!(
                "recurrence coefficient a_{k} = {ak:e} lost positivity"
            )));
        }
        a.push(ak);
        q_prev = std::mem::replace(&mut q, v.iter().map(|vi| vi / ak).collect());
    }
    JacobiMatrix::new(a, b, Tail::None)
}

/// Power moments `s_0..s_K` with the convention `s_{-1} = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    s: Vec<f64>,
}

impl MomentTable {
    pub fn new(s: Vec<f64>) -> Self {
        MomentTable { s }
    }

    pub fn max_order(&self) -> usize {
        self.s.len() - 1
    }

    /// `s_k`, with `s_{-1} = 0`; `None` beyond the table.
    pub fn get(&self, k: isize) -> Option<f64> {
        if k == -1 {
            Some(0.0)
        } else if k < -1 {
            None
        } else {
            self.s.get(k as usize).copied()
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.s
    }

    /// Hankel matrix `(s_{k+l})_{k,l=0..n}`.
    pub fn hankel_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        if 2 * n > self.max_order() {
            return Err(PencilError::DegreeBudgetExceeded {
                requested: 2 * n,
                budget: self.max_order(),
            });
        }
        Ok(DMatrix::from_fn(n + 1, n + 1, |k, l| self.s[k + l]))
    }

    /// Hankel determinant `Delta_n`, with `Delta_{-1} = 1`.
    pub fn hankel(&self, n: isize) -> Result<f64> {
        if n < 0 {
            return Ok(1.0);
        }
        Ok(lu_det(&self.hankel_matrix(n as usize)?))
    }
}
