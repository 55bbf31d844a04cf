//! Acceptance criteria. Each criterion prints one `PASS`/`FAIL` line with its
//! measured error, tolerance and wall time; the test fails if any line fails.
//!
//! Criteria run one after another in a single test so that wall times are not
//! distorted by parallel test threads.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use pencil_core::beamgrid::{discretize, refine, solve_eigen, BeamProblem};
use pencil_core::inverse::{model_representation, reconstruct_pencil};
use pencil_core::operator::{
    associated_gram, associated_vectors, build_associated_operator_in, spectral_function,
};
use pencil_core::pencil::associated_polynomials;
use pencil_core::perturbation::{build_special, ContourSpec, SpecialPencil};
use pencil_core::{ComplexPoly, FiveDiagMatrix, JacobiMatrix, Measure, Pencil, Tail};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twofloat::TwoFloat;

struct Outcome {
    id: u32,
    name: &'static str,
    error: f64,
    tol: f64,
    elapsed: Duration,
    budget: Duration,
    note: String,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.error <= self.tol && self.elapsed <= self.budget
    }

    fn line(&self) -> String {
        format!(
            "[{}] criterion {} ({}): error {:.3e} <= {:.0e}; {:.0?} of {:.0?}{}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.error,
            self.tol,
            self.elapsed,
            self.budget,
            if self.note.is_empty() {
                String::new()
            } else {
                format!("; {}", self.note)
            }
        )
    }
}

fn run<F>(id: u32, name: &'static str, tol: f64, budget_s: f64, f: F) -> Outcome
where
    F: FnOnce() -> (f64, String),
{
    let t = Instant::now();
    let (error, note) = f();
    Outcome {
        id,
        name,
        error,
        tol,
        elapsed: t.elapsed(),
        budget: Duration::from_secs_f64(budget_s),
        note,
    }
}

fn shifted_pencil(c: f64, alpha0: f64) -> Pencil {
    Pencil::new(
        JacobiMatrix::constant(1.0, c),
        FiveDiagMatrix::new(vec![alpha0], vec![0.0], vec![1.0], Tail::Constant).unwrap(),
        1.0,
        0.0,
    )
}

fn shifted_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for c in [2.5, 3.0, 5.0] {
        for alpha0 in [-1.0, 0.0, 1.0] {
            out.push((c, alpha0));
        }
    }
    out
}

/// Random finite pencil with `a, gamma, alpha` in `[0.5, 2]` and the other
/// bands in `[-1, 1]`.
fn random_pencil(rng: &mut ChaCha8Rng, rows: usize) -> Pencil {
    let mut band = |len: usize, lo: f64, hi: f64| -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(lo..hi)).collect()
    };
    let a = band(rows - 1, 0.5, 2.0);
    let b = band(rows, -1.0, 1.0);
    let alpha5 = band(rows, -1.0, 1.0);
    let beta5 = band(rows - 1, -1.0, 1.0);
    let gamma5 = band(rows - 2, 0.5, 2.0);
    let alpha = rng.gen_range(0.5..2.0);
    let beta = rng.gen_range(-1.0..1.0);
    Pencil::new(
        JacobiMatrix::new(a, b, Tail::None).unwrap(),
        FiveDiagMatrix::new(alpha5, beta5, gamma5, Tail::None).unwrap(),
        alpha,
        beta,
    )
}

fn random_cpoly(rng: &mut ChaCha8Rng, deg: usize) -> ComplexPoly {
    ComplexPoly::new(
        (0..=deg)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
}

fn pencil_distance(a: &Pencil, b: &Pencil, n: usize) -> f64 {
    let mut w = (a.alpha - b.alpha).abs().max((a.beta - b.beta).abs());
    for k in 0..=n {
        let pairs = [
            (a.j3.a(k), b.j3.a(k)),
            (a.j3.b(k), b.j3.b(k)),
            (a.j5.alpha(k), b.j5.alpha(k)),
            (a.j5.beta(k), b.j5.beta(k)),
            (a.j5.gamma(k), b.j5.gamma(k)),
        ];
        for (x, y) in pairs {
            w = w.max((x.unwrap() - y.unwrap()).abs());
        }
    }
    w
}

/// Fixture of the perturbation family: `J3` constant with
/// `a_k = sqrt(2)/kappa`, `b_k = 2/kappa`, and `J5 = (kappa/2) J3^2 - 2 J3 + (1/kappa) e0 e0^T`.
fn special_fixture(kappa: f64) -> (SpecialPencil, Pencil) {
    let j3 = JacobiMatrix::constant(2f64.sqrt() / kappa, 2.0 / kappa);
    let m = Measure::jacobi(j3.clone(), 64).unwrap();
    build_special(&j3, &m, kappa / 2.0, -2.0, 1.0 / kappa, 20).unwrap()
}

fn crit1() -> (f64, String) {
    let mut worst = 0.0f64;
    for (c, alpha0) in shifted_grid() {
        let g = associated_gram(&shifted_pencil(c, alpha0), 12).unwrap();
        worst = worst.max((g - DMatrix::<f64>::identity(13, 13)).abs().max());
    }
    (worst, "9 pencils, n, m <= 12".into())
}

fn crit2() -> (f64, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let theta = random_pencil(&mut rng, 20);
        let vecs = associated_vectors(&theta, 15).unwrap();
        for (n, v) in vecs.iter().enumerate() {
            let e: f64 = v
                .iter()
                .enumerate()
                .map(|(i, x)| (x - if i == n { 1.0 } else { 0.0 }).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(e);
        }
    }
    (worst, "20 random pencils, n <= 15".into())
}

fn crit3() -> (f64, String) {
    let mut worst = 0.0f64;
    for (c, alpha0) in shifted_grid() {
        let theta = shifted_pencil(c, alpha0);
        let m = Measure::chebyshev_u(c).unwrap();
        let op = model_representation(&theta, &m, 12).unwrap();
        let back = reconstruct_pencil(&op, 12).unwrap();
        worst = worst.max(pencil_distance(&theta, &back, 10));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let theta = random_pencil(&mut rng, 24);
        let m = Measure::jacobi(theta.j3.clone(), 24).unwrap();
        let op = model_representation(&theta, &m, 12).unwrap();
        let back = reconstruct_pencil(&op, 12).unwrap();
        worst = worst.max(pencil_distance(&theta, &back, 10));
    }
    (worst, "9 example + 20 random pencils, n, k <= 10".into())
}

fn crit4() -> (f64, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows = 30;
    let j3 = JacobiMatrix::new(
        (0..rows - 1).map(|_| rng.gen_range(0.5..2.0)).collect(),
        (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        Tail::None,
    )
    .unwrap();
    let theta = Pencil::classical(&j3, rows - 2).unwrap();
    // the measure enters only through its atoms, so its recurrence is rebuilt independently
    let gauss = Measure::jacobi(j3.clone(), rows).unwrap();
    let m = Measure::atoms(gauss.atoms_rule().unwrap().to_vec()).unwrap();

    let assoc = associated_polynomials(&theta, 12).unwrap();
    let ortho = m.orthonormal_polys(12).unwrap();
    let mut coeff_err = 0.0f64;
    for (p, q) in assoc.iter().zip(&ortho) {
        for (x, y) in p.padded(13).iter().zip(q.padded(13)) {
            coeff_err = coeff_err.max((x - y).abs());
        }
    }

    let op = build_associated_operator_in::<TwoFloat>(&theta, 14).unwrap();
    let mut spec_err = 0.0f64;
    for _ in 0..30 {
        let du = rng.gen_range(0..=6);
        let dv = rng.gen_range(0..=6);
        let u = random_cpoly(&mut rng, du);
        let v = random_cpoly(&mut rng, dv);
        let s = spectral_function(&op, &u, &v).unwrap();
        let integral = m
            .integrate(du + dv, |x| {
                u.eval_complex(x.into()) * v.eval_complex(x.into()).conj()
            })
            .unwrap();
        spec_err = spec_err.max((s - integral).norm());
    }
    (
        coeff_err.max(spec_err),
        format!("coefficients {coeff_err:.2e}, spectral values {spec_err:.2e}"),
    )
}

fn contour_points(cs: &ContourSpec, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|j| {
            Complex64::from_polar(
                cs.rho,
                2.0 * std::f64::consts::PI * (j as f64 + 0.3) / count as f64,
            )
        })
        .collect()
}

fn crit5() -> (f64, String) {
    let mut worst = 0.0f64;
    for kappa in [5.0, 6.0, 10.0] {
        let (sp, _) = special_fixture(kappa);
        let cs = ContourSpec::default_for(&sp);
        for z in contour_points(&cs, 20) {
            let f = sp.resolvent_e0(z, 400, 1e-12).unwrap();
            worst = worst.max(sp.resolvent_residual(z, &f));
        }
    }
    (worst, "kappa in {5, 6, 10}, 20 contour points each".into())
}

/// Entrywise `|r_i - h_i| / (1 + |h_i|)` under the default absolute-plus-relative
/// convention, and whether the node-doubling log decays geometrically until it
/// reaches rounding level.
fn crit6() -> (f64, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut worst_abs = 0.0f64;
    let mut decays = true;
    let mut sample_log = String::new();
    for kappa in [5.0, 6.0, 10.0] {
        let (sp, _) = special_fixture(kappa);
        let cs = ContourSpec::default_for(&sp).with_nodes(8);
        for deg in 0..=10 {
            let u = random_cpoly(&mut rng, deg);
            let k = deg + 8;
            let r = sp.riesz_apply(&u, &cs, k).unwrap();
            let h = sp.horner(&u).unwrap();
            let scale = 1.0 + h.iter().map(|x| x.norm()).fold(0.0, f64::max);
            for i in 0..k {
                let hi = h.get(i).copied().unwrap_or_default();
                let e = (r.vector[i] - hi).norm();
                worst_abs = worst_abs.max(e);
                worst = worst.max(e / (1.0 + hi.norm()));
            }
            let floor = 1e-12 * scale;
            for w in r.log.windows(2) {
                if w[0].1 > floor && w[1].1 > 0.5 * w[0].1 {
                    decays = false;
                }
            }
            if kappa == 10.0 && deg == 10 {
                sample_log = r
                    .log
                    .iter()
                    .map(|(m, d)| format!("{m}:{d:.1e}"))
                    .collect::<Vec<_>>()
                    .join(" ");
            }
        }
    }
    let error = if decays { worst } else { f64::INFINITY };
    (
        error,
        format!("per entry relative to 1 + |h_i|; absolute {worst_abs:.2e}; geometric decay {decays}; log {sample_log}"),
    )
}

fn crit7() -> (f64, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_abs = 0.0f64;
    let mut worst_rel = 0.0f64;
    for kappa in [5.0, 6.0, 10.0] {
        let (sp, theta) = special_fixture(kappa);
        let cs = ContourSpec::default_for(&sp);
        let op = build_associated_operator_in::<TwoFloat>(&theta, 10).unwrap();
        for _ in 0..30 {
            let du = rng.gen_range(0..=6);
            let dv = rng.gen_range(0..=6);
            let u = random_cpoly(&mut rng, du);
            let v = random_cpoly(&mut rng, dv);
            let special = sp.spectral_function_special(&u, &v, &cs).unwrap();
            let generic = spectral_function(&op, &u, &v).unwrap();
            worst_abs = worst_abs.max((special - generic).norm());
            worst_rel = worst_rel.max((special - generic).norm() / (1.0 + generic.norm()));
        }
    }
    (
        worst_abs,
        format!("absolute; relative to 1 + |S| {worst_rel:.2e}"),
    )
}

fn crit8() -> (f64, String) {
    const SLACK: f64 = 1e-14;
    let mut fixtures: Vec<SpecialPencil> = [5.0, 6.0, 10.0]
        .iter()
        .map(|&k| special_fixture(k).0)
        .collect();
    // Chebyshev-type recurrence scaled into [-0.8, 0.8]
    let j3 = JacobiMatrix::constant(0.4, 0.0);
    let m = Measure::jacobi(j3.clone(), 64).unwrap();
    fixtures.push(build_special(&j3, &m, 1.0, 0.5, 0.3, 20).unwrap().0);
    let mut worst = f64::NEG_INFINITY;
    for sp in &fixtures {
        let c = sp.c_support();
        for k in 0..=40 {
            worst = worst.max(sp.moment(k).abs() - c.powi(k as i32));
        }
    }
    // reported as the excess over the slack so that the PASS test reads `<= 0`
    (
        worst.max(0.0),
        format!("max(|s_k| - c^k) = {worst:.2e} with slack {SLACK:.0e}, k <= 40, 4 fixtures"),
    )
}

fn crit9() -> (f64, String) {
    let exact = 4.0 * std::f64::consts::PI.powi(2);
    let dp = discretize(&BeamProblem::from_fn(80, |_| 1.0, |_| 1.0, 0.0).unwrap()).unwrap();
    let lambda = solve_eigen(&dp, 1).unwrap()[0].lambda;
    let rel = (lambda - exact).abs() / exact;
    let r = refine(40, |_| 1.0, |_| 1.0, 0.0, 1).unwrap();
    let order = r.orders[0];
    let order_ok = (1.7..=2.3).contains(&order);
    // the relative error is the gated quantity; an order outside the band fails outright
    let error = if order_ok { rel } else { f64::INFINITY };
    (
        error,
        format!("lambda_1(N=80) = {lambda:.6}, observed order {order:.3} on N = 40/80/160"),
    )
}

#[test]
fn acceptance_criteria() {
    let outcomes = vec![
        run(
            1,
            "orthonormality of associated polynomials",
            1e-8,
            1.0,
            crit1,
        ),
        run(2, "p_n(A) e0 = e_n", 1e-10, 1.0, crit2),
        run(3, "inverse problem round trip", 1e-8, 5.0, crit3),
        run(4, "classical degeneration", 1e-9, 1.0, crit4),
        run(5, "closed-form resolvent residual", 1e-9, 1.0, crit5),
        run(6, "contour calculus vs Horner", 1e-7, 10.0, crit6),
        run(
            7,
            "perturbation route vs generic spectral function",
            1e-7,
            10.0,
            crit7,
        ),
        run(8, "moment decay certificate", 1e-14, 1.0, crit8),
        run(9, "beam grid eigenvalue and order", 0.05, 5.0, crit9),
    ];
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<u32> = outcomes
        .iter()
        .filter(|o| !o.passed())
        .map(|o| o.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
