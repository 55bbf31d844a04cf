//! Finite-difference model of the beam equation `(p y'')'' = λ (-y'' + c r y)`
//! on `[0, 1]` with clamped ends.
//!
//! Grid nodes sit at cell midpoints `x_j = (j - 1/2) h`, `h = 1/N`,
//! `j = 0..=N+1`. Clamping sets the two nodes straddling each end to zero
//! (`y_0 = y_1 = 0`, `y_N = y_{N+1} = 0`), which makes `y(0) = y'(0) = 0`
//! second-order accurate. The unknowns `y_2..y_{N-1}` then satisfy, after
//! multiplication by `h^4`,
//!
//! ```text
//! (five - λ~ tri) y = 0,    λ~ = -λ,
//! ```
//!
//! the pencil relation `(J5 - λ~ J3) y = 0` with `five` symmetric
//! five-diagonal (`α_j = p_{j+1} + 4 p_j + p_{j-1}`, `β_j = -2 (p_{j+1} + p_j)`,
//! `γ_j = p_{j+1}`) and `tri` tridiagonal (`a_j = h^2`,
//! `b_j = (-2 - h^2 c r_j) h^2`). The zeroed left nodes play
//! the role of `y_{-2} = y_{-1} = 0` in the pencil recurrence.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{PencilError, Result};
use crate::pencil::{FiveDiagMatrix, JacobiMatrix, Tail};

/// Smallest accepted number of grid intervals.
pub const MIN_INTERVALS: usize = 8;

/// Coefficients of the beam equation sampled at the cell midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamProblem {
    p: Vec<f64>,
    r: Vec<f64>,
    c: f64,
    n: usize,
}

impl BeamProblem {
    /// Samples `p_j = p(x_j)`, `r_j = r(x_j)` for `j = 1..=N`.
    ///
    /// Samples must be finite and non-negative; zero stiffness is accepted so
    /// that [`as_pencil_report`] can point at it, but the eigensolver needs
    /// strictly positive data.
    pub fn from_samples(p: Vec<f64>, r: Vec<f64>, c: f64) -> Result<BeamProblem> {
        let n = p.len();
        if n < MIN_INTERVALS {
            return Err(PencilError::InvalidParameter(format!(
                "grid needs at least {MIN_INTERVALS} intervals, got {n}"
            )));
        }
        if r.len() != n {
            return Err(PencilError::InvalidInput {
                pointer: "/r".into(),
                message: format!("expected {n} samples, got {}", r.len()),
            });
        }
        for (name, data) in [("p", &p), ("r", &r)] {
            if let Some(i) = data.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(PencilError::InvalidInput {
                    pointer: format!("/{name}/{i}"),
                    message: format!("sample {} is not a finite non-negative number", data[i]),
                });
            }
        }
        if !c.is_finite() {
            return Err(PencilError::InvalidParameter(
                "coupling c is not finite".into(),
            ));
        }
        Ok(BeamProblem { p, r, c, n })
    }

    pub fn from_fn<P, R>(n: usize, p: P, r: R, c: f64) -> Result<BeamProblem>
    where
        P: Fn(f64) -> f64,
        R: Fn(f64) -> f64,
    {
        let h = 1.0 / n as f64;
        let xs: Vec<f64> = (1..=n).map(|j| (j as f64 - 0.5) * h).collect();
        BeamProblem::from_samples(
            xs.iter().map(|&x| p(x)).collect(),
            xs.iter().map(|&x| r(x)).collect(),
            c,
        )
    }

    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Grid node `x_j = (j - 1/2) h`, `j = 0..=N+1`.
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 - 0.5) * self.h()
    }

    /// Stiffness at node `j`, `1 <= j <= N`.
    fn p_at(&self, j: usize) -> f64 {
        self.p[j - 1]
    }

    fn r_at(&self, j: usize) -> f64 {
        self.r[j - 1]
    }
}

/// The assembled grid pencil on the interior unknowns `y_2..y_{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePencil {
    pub five: FiveDiagMatrix,
    pub tri: JacobiMatrix,
    /// Grid intervals `N`.
    pub intervals: usize,
}

impl DiscretePencil {
    /// Number of interior unknowns, `N - 2`.
    pub fn dim(&self) -> usize {
        self.intervals - 2
    }

    /// `λ~ = -λ`: roots of `five - λ~ tri` are reported as `λ`.
    pub const SIGN_NOTE: &'static str =
        "grid relation is (five - lambda~ tri) y = 0 with lambda~ = -lambda; reported eigenvalues are lambda";
}

pub fn discretize(bp: &BeamProblem) -> Result<DiscretePencil> {
    let n = bp.n;
    let h = bp.h();
    let h2 = h * h;
    // interior node j = i + 2 for i = 0..n-2
    let dim = n - 2;
    let mut alpha5 = Vec::with_capacity(dim);
    let mut beta5 = Vec::with_capacity(dim - 1);
    let mut gamma5 = Vec::with_capacity(dim - 2);
    let mut a = Vec::with_capacity(dim - 1);
    let mut b = Vec::with_capacity(dim);
    for i in 0..dim {
        let j = i + 2;
        alpha5.push(bp.p_at(j + 1) + 4.0 * bp.p_at(j) + bp.p_at(j - 1));
        b.push((-2.0 - h2 * bp.c * bp.r_at(j)) * h2);
        if i + 1 < dim {
            beta5.push(-2.0 * (bp.p_at(j + 1) + bp.p_at(j)));
            a.push(h2);
        }
        if i + 2 < dim {
            gamma5.push(bp.p_at(j + 1));
        }
    }
    Ok(DiscretePencil {
        five: FiveDiagMatrix::new(alpha5, beta5, gamma5, Tail::None)?,
        tri: JacobiMatrix::new(a, b, Tail::None)?,
        intervals: n,
    })
}

/// An eigenpair of the grid model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamMode {
    pub lambda: f64,
    /// Values at all nodes `x_0..x_{N+1}` (clamped nodes included), scaled to
    /// maximum modulus one with a positive extreme entry.
    pub mode: Vec<f64>,
}

/// The `count` smallest eigenvalues `λ` of `five y = λ (-tri) y`.
///
/// `-tri` is positive definite, so the problem is reduced to a symmetric one
/// through its Cholesky factor and solved densely.
pub fn solve_eigen(dp: &DiscretePencil, count: usize) -> Result<Vec<BeamMode>> {
    let dim = dp.dim();
    if count == 0 || dim < count + 2 {
        return Err(PencilError::InvalidParameter(format!(
            "{count} modes requested from {dim} interior unknowns"
        )));
    }
    let five = dp.five.dense(dim)?;
    let mass = -dp.tri.dense(dim)?;
    let chol = mass
        .cholesky()
        .ok_or_else(|| PencilError::NumericalFailure("-tri is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| PencilError::NumericalFailure("singular Cholesky factor".into()))?;
    let mut c = &l_inv * five * l_inv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, f64::EPSILON, 100_000).ok_or_else(|| {
        PencilError::NumericalFailure("symmetric eigensolver did not converge".into())
    })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt_inv = l_inv.transpose();
    let mut out = Vec::with_capacity(count);
    for &k in order.iter().take(count) {
        let y = &lt_inv * eig.eigenvectors.column(k);
        let mut mode = vec![0.0; dp.intervals + 2];
        for i in 0..dim {
            mode[i + 2] = y[i];
        }
        let peak = mode
            .iter()
            .copied()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        for v in mode[2..dim + 2].iter_mut() {
            *v /= peak;
        }
        out.push(BeamMode {
            lambda: eig.eigenvalues[k],
            mode,
        });
    }
    Ok(out)
}

/// Dense `(five, tri)` pair, handy for cross-checks with general eigensolvers.
pub fn dense_pair(dp: &DiscretePencil) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    Ok((dp.five.dense(dp.dim())?, dp.tri.dense(dp.dim())?))
}

/// Whether the grid data form a Jacobi-type pencil.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamReport {
    pub a_positive: bool,
    pub a_failures: Vec<usize>,
    pub gamma_positive: bool,
    pub gamma_failures: Vec<usize>,
    pub b_real: bool,
    pub five_symmetric: bool,
    pub sign_note: &'static str,
}

impl BeamReport {
    pub fn valid(&self) -> bool {
        self.a_positive && self.gamma_positive && self.b_real
    }
}

pub fn as_pencil_report(dp: &DiscretePencil) -> BeamReport {
    let a_failures: Vec<usize> = positions(dp.tri.a_band(), |v| !(v > 0.0));
    let gamma_failures: Vec<usize> = positions(dp.five.gamma_band(), |v| !(v > 0.0));
    BeamReport {
        a_positive: a_failures.is_empty(),
        a_failures,
        gamma_positive: gamma_failures.is_empty(),
        gamma_failures,
        b_real: dp.tri.b_band().iter().all(|v| v.is_finite()),
        // only the upper triangle is stored
        five_symmetric: true,
        sign_note: DiscretePencil::SIGN_NOTE,
    }
}

fn positions(data: &[f64], bad: impl Fn(f64) -> bool) -> Vec<usize> {
    data.iter()
        .enumerate()
        .filter(|(_, &v)| bad(v))
        .map(|(i, _)| i)
        .collect()
}

/// Smallest eigenvalues on `N`, `2N`, `4N` intervals with observed orders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refinement {
    pub intervals: [usize; 3],
    /// `lambdas[g][k]`: eigenvalue `k` on grid `g`.
    pub lambdas: Vec<Vec<f64>>,
    /// `(λ_N - λ_2N) / (λ_2N - λ_4N)` per eigenvalue.
    pub ratios: Vec<f64>,
    /// `log2` of the ratios.
    pub orders: Vec<f64>,
}

pub fn refine<P, R>(n: usize, p: P, r: R, c: f64, count: usize) -> Result<Refinement>
where
    P: Fn(f64) -> f64,
    R: Fn(f64) -> f64,
{
    let grids = [n, 2 * n, 4 * n];
    let mut lambdas = Vec::with_capacity(3);
    for &g in &grids {
        let dp = discretize(&BeamProblem::from_fn(g, &p, &r, c)?)?;
        lambdas.push(
            solve_eigen(&dp, count)?
                .into_iter()
                .map(|m| m.lambda)
                .collect::<Vec<_>>(),
        );
    }
    let ratios: Vec<f64> = (0..count)
        .map(|k| (lambdas[0][k] - lambdas[1][k]) / (lambdas[1][k] - lambdas[2][k]))
        .collect();
    let orders = ratios.iter().map(|r| r.abs().log2()).collect();
    Ok(Refinement {
        intervals: grids,
        lambdas,
        ratios,
        orders,
    })
}
