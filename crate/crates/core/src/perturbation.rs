//! The perturbation family `J5 = a J3^2 + b J3 + d diag(1, 0, 0, ...)`.
//!
//! When the measure `σ` of `J3` lives in `[-c, c]` with `c < 1`, the model
//! operator becomes, in monomial coordinates, the bounded operator
//!
//! ```text
//! Â w = (a S + b E) w + d (w, s) e0,     s = (0, s_0, s_1, s_2, ...)
//! ```
//!
//! with `S` the right shift. Its resolvent at `e0` is known in closed form,
//! `R_z e0 = v(z) / (a + d s(z))` with `v_k(z) = -(a / (z - b))^{k+1}`, so
//! `u(Â) e0` follows from a contour integral over a circle of radius
//! `ρ > ‖Â‖`. The associated operator `A` of the equivalent pencil may be
//! unbounded; only `Â` is bounded.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{PencilError, Result};
use crate::measure::Measure;
use crate::pencil::{scaled_square, JacobiMatrix, Pencil};
use crate::poly::ComplexPoly;
use crate::scalar::Scalar;

/// Slack allowed in the moment certificate `|s_k| <= c^k`.
pub const MOMENT_SLACK: f64 = 1e-14;
/// Smallest admissible `|a + d s(z)|`.
pub const POLE_GUARD: f64 = 1e-12;
/// Number of moments cached at construction.
const MOMENT_CACHE: usize = 4096;

/// A perturbed pencil together with its certified support radius.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialPencil {
    base: JacobiMatrix,
    a: f64,
    b: f64,
    d: f64,
    c_support: f64,
    measure: Measure,
    moments: Vec<f64>,
}

/// The vector `s = sum_{k>=1} s_{k-1} e_k`, truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct TailVector {
    pub entries: Vec<f64>,
    /// `1/sqrt(1 - c^2)` plus slack: bounds `‖s‖` over all indices.
    pub norm_upper: f64,
}

/// Circle `|z| = rho` sampled at `nodes` equispaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourSpec {
    pub rho: f64,
    pub nodes: usize,
    pub tol: f64,
    pub max_nodes: usize,
}

impl ContourSpec {
    pub const DEFAULT_NODES: usize = 256;
    pub const DEFAULT_TOL: f64 = 1e-8;
    pub const MAX_NODES: usize = 1 << 20;
    pub const RADIUS_FACTOR: f64 = 1.25;

    /// Radius `1.25 ‖Â‖`, 256 starting nodes.
    pub fn default_for(sp: &SpecialPencil) -> ContourSpec {
        ContourSpec {
            rho: Self::RADIUS_FACTOR * sp.norm_bound(),
            nodes: Self::DEFAULT_NODES,
            tol: Self::DEFAULT_TOL,
            max_nodes: Self::MAX_NODES,
        }
    }

    pub fn with_nodes(mut self, nodes: usize) -> ContourSpec {
        self.nodes = nodes;
        self
    }

    fn validate(&self, sp: &SpecialPencil) -> Result<()> {
        let bound = sp.norm_bound();
        if !(self.rho > bound) {
            return Err(PencilError::InvalidParameter(format!(
                "contour radius {} does not exceed the norm bound {bound}",
                self.rho
            )));
        }
        if !self.nodes.is_power_of_two() || self.nodes < 2 {
            return Err(PencilError::InvalidParameter(format!(
                "node count {} is not a power of two",
                self.nodes
            )));
        }
        if !(self.tol > 0.0) {
            return Err(PencilError::InvalidParameter(
                "tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Contour approximation of `u(Â) e0` with its node-doubling history.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszResult {
    pub vector: Vec<Complex64>,
    /// `(M, delta)`: l2 change of the first `K` entries when going to `M` nodes.
    /// Doubling stops once `delta <= tol * max(1, ‖vector‖)`.
    pub log: Vec<(usize, f64)>,
}

/// Builds the special pencil and its equivalent general pencil with bands
/// up to row `n`.
///
/// The support radius `c` is the Gershgorin radius of `J3`; the measure is
/// accepted when its recurrence matches `J3`, its nodes lie in `[-c, c]`, and
/// `|s_k| <= c^k` holds for `k <= max(2n, 40)`.
pub fn build_special(
    j3: &JacobiMatrix,
    m: &Measure,
    a: f64,
    b: f64,
    d: f64,
    n: usize,
) -> Result<(SpecialPencil, Pencil)> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(PencilError::InvalidParameter(format!(
            "a = {a} is not positive"
        )));
    }
    if !b.is_finite() || !d.is_finite() {
        return Err(PencilError::InvalidParameter(
            "b and d must be finite".into(),
        ));
    }
    let c = j3.gershgorin_radius();
    if !(c < 1.0) {
        return Err(PencilError::InvalidParameter(format!(
            "support radius c = {c} of J3 is not below 1"
        )));
    }
    let check_n = n.min(m.degree_budget());
    let jm = m.jacobi_from_measure(check_n)?;
    for k in 0..check_n {
        let (x, y) = (jm.a(k)?, j3.a(k)?);
        if (x - y).abs() > 1e-8 * y.abs().max(1.0) {
            return Err(PencilError::MeasureMismatch(format!(
                "a_{k}: measure {x}, J3 {y}"
            )));
        }
    }
    for k in 0..=check_n {
        let (x, y) = (jm.b(k)?, j3.b(k)?);
        if (x - y).abs() > 1e-8 * y.abs().max(1.0) {
            return Err(PencilError::MeasureMismatch(format!(
                "b_{k}: measure {x}, J3 {y}"
            )));
        }
    }
    let k_cert = (2 * n).max(40);
    let moments = match m.atoms_rule() {
        Some(rule) => {
            if let Some(&(x, _)) = rule.iter().find(|(x, _)| x.abs() > c + MOMENT_SLACK) {
                return Err(PencilError::SupportBoundViolated {
                    k: 1,
                    moment: x.abs(),
                    c,
                });
            }
            atom_moments(rule, MOMENT_CACHE.max(k_cert + 1))
        }
        None => m.moments(k_cert)?.as_slice().to_vec(),
    };
    for (k, &s) in moments.iter().enumerate().take(k_cert + 1) {
        if s.abs() > c.powi(k as i32) + MOMENT_SLACK {
            return Err(PencilError::SupportBoundViolated {
                k,
                moment: s.abs(),
                c,
            });
        }
    }
    let a0 = j3.a(0)?;
    let b0 = j3.b(0)?;
    let j5 = scaled_square(j3, n, a, b, d)?;
    let alpha = 1.0 / (a * a0);
    let beta = -b0 / a0 - b / (a * a0);
    let sp = SpecialPencil {
        base: j3.clone(),
        a,
        b,
        d,
        c_support: c,
        measure: m.clone(),
        moments,
    };
    Ok((sp, Pencil::new(j3.clone(), j5, alpha, beta)))
}

fn atom_moments(rule: &[(f64, f64)], count: usize) -> Vec<f64> {
    let mut s = vec![0.0; count];
    for &(x, w) in rule {
        let mut p = w;
        for sk in s.iter_mut() {
            *sk += p;
            p *= x;
        }
    }
    s
}

impl SpecialPencil {
    pub fn base(&self) -> &JacobiMatrix {
        &self.base
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// `(a, b, d)`.
    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.d)
    }

    pub fn c_support(&self) -> f64 {
        self.c_support
    }

    /// `s_k`; moments of atomic measures are extended past the cache on demand.
    pub fn moment(&self, k: usize) -> f64 {
        if let Some(&s) = self.moments.get(k) {
            return s;
        }
        match self.measure.atoms_rule() {
            Some(rule) => rule.iter().map(|&(x, w)| w * x.powi(k as i32)).sum(),
            None => 0.0,
        }
    }

    /// Cached moments `s_0, s_1, ...`.
    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn tail_vector(&self, k: usize) -> TailVector {
        let mut entries = vec![0.0; k];
        for (i, e) in entries.iter_mut().enumerate().skip(1) {
            *e = self.moment(i - 1);
        }
        let c2 = self.c_support * self.c_support;
        TailVector {
            entries,
            norm_upper: 1.0 / (1.0 - c2).sqrt() + MOMENT_SLACK,
        }
    }

    /// `a + |b| + |d| ‖s‖`, an upper bound for `‖Â‖`.
    pub fn norm_bound(&self) -> f64 {
        let c2 = self.c_support * self.c_support;
        let s_norm = 1.0 / (1.0 - c2).sqrt() + MOMENT_SLACK;
        self.a + self.b.abs() + self.d.abs() * s_norm
    }

    /// `(w, s) = sum_{k>=1} w_k s_{k-1}`.
    fn pair_with_tail<T: Scalar>(&self, w: &[T]) -> T {
        w.iter()
            .enumerate()
            .skip(1)
            .fold(T::zero(), |acc, (k, &x)| acc + x.scale(self.moment(k - 1)))
    }

    /// First `k` entries of `Â w` for a vector with at most `k` entries.
    pub fn ahat_apply<T: Scalar>(&self, w: &[T], k: usize) -> Result<Vec<T>> {
        if w.len() > k {
            return Err(PencilError::TruncationExceeded {
                band: "coefficients",
                index: w.len(),
                available: k,
            });
        }
        let mut out = vec![T::zero(); k];
        for (i, &x) in w.iter().enumerate() {
            out[i] += x.scale(self.b);
            if i + 1 < k {
                out[i + 1] += x.scale(self.a);
            }
        }
        out[0] += self.pair_with_tail(w).scale(self.d);
        Ok(out)
    }

    /// `u(Â) e0` by Horner's scheme on `Â`; length `deg u + 1`.
    pub fn horner(&self, u: &ComplexPoly) -> Result<Vec<Complex64>> {
        let Some(deg) = u.degree() else {
            return Ok(vec![Complex64::new(0.0, 0.0)]);
        };
        let mut y = vec![u.coeff(deg)];
        for k in (0..deg).rev() {
            y = self.ahat_apply(&y, y.len() + 1)?;
            y[0] += u.coeff(k);
        }
        Ok(y)
    }

    fn ratio(&self, z: Complex64) -> Result<Complex64> {
        let dist = (z - self.b).norm();
        if !(dist > self.a) {
            return Err(PencilError::SeriesDivergent {
                distance: dist,
                a: self.a,
            });
        }
        Ok(Complex64::new(self.a, 0.0) / (z - self.b))
    }

    /// `s(z) = -sum_{k>=1} (a/(z-b))^{k+1} s_{k-1}` with error at most `eps`.
    pub fn s_of_z(&self, z: Complex64, eps: f64) -> Result<Complex64> {
        let q = self.ratio(z)?;
        let qa = q.norm();
        let c = self.c_support;
        let rate = qa * c;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut qk = q * q;
        let mut k = 1usize;
        loop {
            sum -= qk * self.moment(k - 1);
            // remaining terms j > k are bounded by |q|^{j+1} c^{j-1}
            let tail = qa.powi(k as i32 + 2) * c.powi(k as i32) / (1.0 - rate);
            if tail < eps {
                return Ok(sum);
            }
            qk *= q;
            k += 1;
            if k > 10_000_000 {
                return Err(PencilError::NumericalFailure(format!(
                    "s(z) series did not reach tolerance {eps:e}"
                )));
            }
        }
    }

    /// Number of resolvent entries after which `|v_k(z)| < eps`.
    fn window(&self, z: Complex64, eps: f64) -> Result<usize> {
        let qa = self.ratio(z)?.norm();
        Ok(((eps.ln() / qa.ln()).ceil().max(1.0) as usize) + 1)
    }

    /// First `k` entries of `R_z(Â) e0 = v(z) / (a + d s(z))`.
    ///
    /// The residual `(Â - z) f - e0` is checked on a window long enough for the
    /// truncated entries to be negligible and must not exceed `eps (1 + |z|)`.
    pub fn resolvent_e0(&self, z: Complex64, k: usize, eps: f64) -> Result<Vec<Complex64>> {
        let f = self.resolvent_raw(z, k.max(self.window(z, eps * 1e-3)?), eps)?;
        let residual = self.resolvent_residual(z, &f);
        if !(residual <= eps * (1.0 + z.norm())) {
            return Err(PencilError::NumericalFailure(format!(
                "resolvent residual {residual:e} exceeds {:e}",
                eps * (1.0 + z.norm())
            )));
        }
        Ok(f[..k].to_vec())
    }

    fn resolvent_raw(&self, z: Complex64, k: usize, eps: f64) -> Result<Vec<Complex64>> {
        let s = self.s_of_z(z, eps * 1e-3)?;
        let den = self.a + self.d * s;
        if !(den.norm() > POLE_GUARD) {
            return Err(PencilError::ResolventPole(den.norm()));
        }
        let q = self.ratio(z)?;
        let mut out = Vec::with_capacity(k);
        let mut qk = q;
        for _ in 0..k {
            out.push(-qk / den);
            qk *= q;
        }
        Ok(out)
    }

    /// `‖(Â - z) f - e0‖` for a finite vector `f`.
    pub fn resolvent_residual(&self, z: Complex64, f: &[Complex64]) -> f64 {
        let mut r = self
            .ahat_apply(f, f.len() + 1)
            .expect("window sized from the input");
        for (ri, &fi) in r.iter_mut().zip(f) {
            *ri -= z * fi;
        }
        r[0] -= 1.0;
        r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `τ = 1/(a + d s(z))`, the scale of the resolvent.
    pub fn tau(&self, z: Complex64, eps: f64) -> Result<Complex64> {
        Ok(1.0 / (self.a + self.d * self.s_of_z(z, eps)?))
    }

    /// `u(Â) e0 = -(1/2πi) ∮ u(z) R_z(Â) e0 dz` by the trapezoid rule on the
    /// contour, doubling the node count until the first `k` entries change by
    /// less than `contour.tol` relative to their size (absolute below 1).
    pub fn riesz_apply(
        &self,
        u: &ComplexPoly,
        contour: &ContourSpec,
        k: usize,
    ) -> Result<RieszResult> {
        contour.validate(self)?;
        let eps = 1e-16;
        let term = |j: usize, m: usize| -> Result<Vec<Complex64>> {
            let theta = 2.0 * PI * j as f64 / m as f64;
            let z = Complex64::from_polar(contour.rho, theta);
            let f = self.resolvent_raw(z, k, eps)?;
            let w = u.eval_complex(z) * z;
            Ok(f.into_iter().map(|x| x * w).collect())
        };
        let mut m = contour.nodes;
        let mut sum = vec![Complex64::new(0.0, 0.0); k];
        for j in 0..m {
            for (s, t) in sum.iter_mut().zip(term(j, m)?) {
                *s += t;
            }
        }
        let scaled = |sum: &[Complex64], m: usize| -> Vec<Complex64> {
            sum.iter().map(|&s| -s / m as f64).collect()
        };
        let mut current = scaled(&sum, m);
        let mut log = Vec::new();
        loop {
            if 2 * m > contour.max_nodes {
                let delta = log.last().map_or(f64::INFINITY, |&(_, d)| d);
                return Err(PencilError::ContourNotConverged { nodes: m, delta });
            }
            // the nodes of 2m contain those of m; add the odd ones
            for j in (1..2 * m).step_by(2) {
                for (s, t) in sum.iter_mut().zip(term(j, 2 * m)?) {
                    *s += t;
                }
            }
            m *= 2;
            let next = scaled(&sum, m);
            let delta = next
                .iter()
                .zip(&current)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            log.push((m, delta));
            current = next;
            let size = current.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if delta <= contour.tol * size.max(1.0) {
                return Ok(RieszResult {
                    vector: current,
                    log,
                });
            }
        }
    }

    /// `S(u, v) = ∫ u(𝒜)(1) conj(v(𝒜)(1)) dσ` with both polynomials obtained
    /// from the contour calculus.
    pub fn spectral_function_special(
        &self,
        u: &ComplexPoly,
        v: &ComplexPoly,
        contour: &ContourSpec,
    ) -> Result<Complex64> {
        let ku = u.degree().unwrap_or(0) + 8;
        let kv = v.degree().unwrap_or(0) + 8;
        let pu = ComplexPoly::new(self.riesz_apply(u, contour, ku)?.vector);
        let pv = ComplexPoly::new(self.riesz_apply(v, contour, kv)?.vector);
        let rule = self
            .measure
            .atoms_rule()
            .ok_or_else(|| PencilError::InvalidParameter("measure has no atoms".into()))?;
        Ok(rule.iter().fold(Complex64::new(0.0, 0.0), |acc, &(x, w)| {
            let zx = Complex64::new(x, 0.0);
            acc + pu.eval_complex(zx) * pv.eval_complex(zx).conj() * w
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn special_fixture(kappa: f64) -> (SpecialPencil, Pencil) {
        let j3 = JacobiMatrix::constant(2f64.sqrt() / kappa, 2.0 / kappa);
        let m = Measure::jacobi(j3.clone(), 64).unwrap();
        build_special(&j3, &m, kappa / 2.0, -2.0, 1.0 / kappa, 20).unwrap()
    }

    #[test]
    fn example_coefficients() {
        let kappa = 6.0;
        let (sp, theta) = special_fixture(kappa);
        assert!((sp.c_support() - (2.0 + 2.0 * 2f64.sqrt()) / kappa).abs() < 1e-15);
        assert!((theta.alpha - 2f64.sqrt()).abs() < 1e-14);
        assert!((theta.beta - 2f64.sqrt()).abs() < 1e-14);
        for n in 0..6 {
            assert!(theta.j5.alpha(n).unwrap().abs() < 1e-14);
            assert!(theta.j5.beta(n).unwrap().abs() < 1e-14);
            assert!((theta.j5.gamma(n).unwrap() - 1.0 / kappa).abs() < 1e-15);
        }
    }

    #[test]
    fn ahat_on_basis_vectors() {
        let (sp, _) = special_fixture(5.0);
        let (a, b, d) = sp.coefficients();
        let e0 = sp.ahat_apply(&[1.0], 3).unwrap();
        assert_eq!(e0, vec![b, a, 0.0]);
        let e1 = sp.ahat_apply(&[0.0, 1.0], 3).unwrap();
        assert!((e1[0] - d * sp.moment(0)).abs() < 1e-15);
        assert_eq!(&e1[1..], &[b, a]);
    }

    #[test]
    fn zero_perturbation_resolvent() {
        let j3 = JacobiMatrix::constant(0.2, 0.1);
        let m = Measure::jacobi(j3.clone(), 32).unwrap();
        let (sp, theta) = build_special(&j3, &m, 1.0, 0.0, 0.0, 10).unwrap();
        assert_eq!(sp.norm_bound(), 1.0);
        assert!((theta.j5.alpha(2).unwrap() - (0.04 + 0.01 + 0.04)).abs() < 1e-15);
        let z = Complex64::new(2.0, 1.0);
        let f = sp.resolvent_e0(z, 5, 1e-12).unwrap();
        let q = 1.0 / z;
        for (k, fk) in f.iter().enumerate() {
            assert!((fk + q.powi(k as i32 + 1)).norm() < 1e-15);
        }
    }

    #[test]
    fn divergent_series_rejected() {
        let (sp, _) = special_fixture(5.0);
        let (a, b, _) = sp.coefficients();
        let z = Complex64::new(b + 0.5 * a, 0.0);
        assert!(matches!(
            sp.s_of_z(z, 1e-12),
            Err(PencilError::SeriesDivergent { .. })
        ));
    }

    #[test]
    fn wide_support_rejected() {
        let j3 = JacobiMatrix::constant(1.0, 0.0);
        let m = Measure::chebyshev_u(0.0).unwrap();
        assert!(build_special(&j3, &m, 1.0, 0.0, 1.0, 8).is_err());
    }

    #[test]
    fn riesz_identity_and_shift() {
        let (sp, _) = special_fixture(10.0);
        let contour = ContourSpec::default_for(&sp);
        let one = sp.riesz_apply(&ComplexPoly::one(), &contour, 6).unwrap();
        assert!((one.vector[0] - 1.0).norm() < 1e-12);
        assert!(one.vector[1..].iter().all(|x| x.norm() < 1e-12));
        let (a, b, _) = sp.coefficients();
        let z = sp
            .riesz_apply(&ComplexPoly::monomial(1), &contour, 6)
            .unwrap();
        assert!((z.vector[0] - b).norm() < 1e-10 && (z.vector[1] - a).norm() < 1e-10);
    }
}
