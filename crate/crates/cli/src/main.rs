//! `pencil`: command-line front end for `pencil-core`.
//!
//! Results go to `--output` or stdout. On failure a single JSON object
//! `{"code", "message", "pointer"}` is written to stdout instead and the exit
//! status is 2 for invalid input, 3 for numerical failure and 1 for I/O
//! errors. A run manifest with every effective option is logged to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{debug, info};
use num_complex::Complex64;
use pencil_core::beamgrid::{self, BeamProblem};
use pencil_core::inverse::{check_admissibility, reconstruct_pencil, ModelOperator};
use pencil_core::io::{self, emit_polys, emit_table, PencilDoc};
use pencil_core::operator::associated_gram;
use pencil_core::pencil::associated_polynomials;
use pencil_core::perturbation::{build_special, ContourSpec, SpecialPencil};
use pencil_core::{ComplexPoly, PencilError};
use serde::Serialize;
use serde_json::json;

const DEFAULT_SIZE: usize = 16;
const DEFAULT_TOL: f64 = 1e-9;
const DEFAULT_NODES: usize = 256;

#[derive(Debug, Parser)]
#[command(
    name = "pencil",
    version,
    about = "Spectral computations for Jacobi-type pencils J5 - lambda J3"
)]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the structural conditions of a pencil.
    Validate {
        #[arg(long)]
        pencil: PathBuf,
    },
    /// Coefficients of the associated polynomials p_0..p_N as CSV.
    Poly {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIZE)]
        max_degree: usize,
    },
    /// Gram matrix S(p_n, p_m) of the associated polynomials as CSV.
    Spectral {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIZE)]
        max_degree: usize,
    },
    /// Reconstruct a pencil from a measure and an operator matrix.
    Inverse {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        xi: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIZE)]
        size: usize,
    },
    /// Coefficients of R_z e0 for the perturbation family.
    Resolvent {
        #[arg(long)]
        special: PathBuf,
        /// Spectral parameter as `RE,IM`.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex64,
        #[arg(long, default_value_t = DEFAULT_SIZE)]
        size: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// u(Â) e0 by contour integration, with the node-doubling log.
    Riesz {
        #[arg(long)]
        special: PathBuf,
        /// Real coefficients `c0,c1,...`, low degree first.
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Entries to report; defaults to `deg u + 8`.
        #[arg(long)]
        size: Option<usize>,
        /// Also write the convergence log as CSV (`M,delta`).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Eigenvalues of the finite-difference beam model.
    Beam {
        #[arg(long, default_value_t = DEFAULT_SIZE)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        /// Stiffness samples at the N cell midpoints (one-column CSV).
        #[arg(long)]
        p_file: Option<PathBuf>,
        /// Density samples at the N cell midpoints (one-column CSV).
        #[arg(long)]
        r_file: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        modes: usize,
        /// Solve the uniform beam (p = r = 1) on N, 2N and 4N and report
        /// convergence ratios.
        #[arg(long)]
        refine: bool,
    },
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [re, im] => {
            let re = re
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("real part: {e}"))?;
            let im = im
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("imaginary part: {e}"))?;
            Ok(Complex64::new(re, im))
        }
        _ => Err("expected RE,IM".into()),
    }
}

/// Failure of a run: a library error or an I/O problem.
#[derive(Debug)]
enum Failure {
    Pencil(PencilError),
    Io { path: PathBuf, message: String },
}

impl From<PencilError> for Failure {
    fn from(e: PencilError) -> Self {
        Failure::Pencil(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Pencil(e) if e.is_numerical() => 3,
            Failure::Pencil(_) => 2,
            Failure::Io { .. } => 1,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Failure::Pencil(e) => {
                let pointer = match e {
                    PencilError::InvalidInput { pointer, .. } => Some(pointer.clone()),
                    _ => None,
                };
                json!({"code": e.code(), "message": e.to_string(), "pointer": pointer})
            }
            Failure::Io { path, message } => json!({
                "code": "IO_ERROR",
                "message": format!("{}: {message}", path.display()),
                "pointer": null,
            }),
        }
    }
}

type RunResult<T> = Result<T, Failure>;

fn read(path: &Path) -> RunResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure::Pencil(PencilError::InvalidParameter(message.into()))
}

fn positive_tol(tol: f64) -> RunResult<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("tolerance {tol} must be positive")))
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn complex_pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn load_special(path: &Path) -> RunResult<SpecialPencil> {
    let (doc, j3, m) = io::parse_special(&read(path)?)?;
    let (sp, _) = build_special(&j3, &m, doc.a, doc.b, doc.d, doc.size)?;
    Ok(sp)
}

fn load_samples(path: Option<&Path>, n: usize) -> RunResult<Vec<f64>> {
    match path {
        Some(p) => Ok(io::parse_samples(&read(p)?)?),
        None => Ok(vec![1.0; n]),
    }
}

fn run(cmd: &Command) -> RunResult<String> {
    match cmd {
        Command::Validate { pencil } => {
            let theta = io::parse_pencil(&read(pencil)?)?;
            let violations = theta.validate();
            if let Some(first) = violations.first() {
                let detail: Vec<String> = violations
                    .iter()
                    .map(|v| format!("{}: {v:?}", v.pointer()))
                    .collect();
                return Err(Failure::Pencil(PencilError::InvalidInput {
                    pointer: first.pointer(),
                    message: format!("pencil is invalid ({})", detail.join("; ")),
                }));
            }
            Ok(to_json(&json!({"status": "valid"})))
        }
        Command::Poly { pencil, max_degree } => {
            let theta = io::parse_pencil(&read(pencil)?)?;
            Ok(emit_polys(&associated_polynomials(&theta, *max_degree)?)?)
        }
        Command::Spectral { pencil, max_degree } => {
            let theta = io::parse_pencil(&read(pencil)?)?;
            let g = associated_gram(&theta, *max_degree)?;
            let rows: Vec<Vec<f64>> = g.row_iter().map(|r| r.iter().copied().collect()).collect();
            Ok(emit_table(None, &rows)?)
        }
        Command::Inverse { measure, xi, size } => {
            let m = io::parse_measure(&read(measure)?)?;
            let xi = io::parse_xi(&read(xi)?)?;
            let op = ModelOperator::new(xi, m)?;
            let report = check_admissibility(&op, *size)?;
            debug!("admissibility: {report:?}");
            let theta = reconstruct_pencil(&op, *size)?;
            Ok(to_json(&json!({
                "pencil": PencilDoc::from_pencil(&theta)?,
                "admissibility": report,
            })))
        }
        Command::Resolvent {
            special,
            z,
            size,
            tol,
        } => {
            positive_tol(*tol)?;
            let sp = load_special(special)?;
            let f = sp.resolvent_e0(*z, *size, *tol)?;
            Ok(to_json(&json!({
                "z": [z.re, z.im],
                "coefficients": complex_pairs(&f),
            })))
        }
        Command::Riesz {
            special,
            poly,
            nodes,
            tol,
            size,
            log,
        } => {
            positive_tol(*tol)?;
            let coeffs = poly
                .split(',')
                .enumerate()
                .map(|(i, s)| {
                    s.trim().parse::<f64>().map_err(|e| {
                        Failure::Pencil(PencilError::InvalidInput {
                            pointer: format!("/poly/{i}"),
                            message: format!("{s:?}: {e}"),
                        })
                    })
                })
                .collect::<RunResult<Vec<f64>>>()?;
            let u = ComplexPoly::new(coeffs.into_iter().map(|c| Complex64::new(c, 0.0)).collect());
            let k = size.unwrap_or(u.degree().unwrap_or(0) + 8);
            let sp = load_special(special)?;
            let mut contour = ContourSpec::default_for(&sp).with_nodes(*nodes);
            contour.tol = *tol;
            info!(
                "contour radius {}, norm bound {}",
                contour.rho,
                sp.norm_bound()
            );
            let r = sp.riesz_apply(&u, &contour, k)?;
            if let Some(path) = log {
                let rows: Vec<Vec<f64>> = r.log.iter().map(|&(m, d)| vec![m as f64, d]).collect();
                let table = emit_table(Some(&["M".to_string(), "delta".to_string()]), &rows)?;
                fs::write(path, table).map_err(|e| Failure::Io {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
            }
            let log: Vec<_> = r
                .log
                .iter()
                .map(|&(m, d)| json!({"M": m, "delta": d}))
                .collect();
            Ok(to_json(&json!({
                "vector": complex_pairs(&r.vector),
                "log": log,
            })))
        }
        Command::Beam {
            n,
            c,
            p_file,
            r_file,
            modes,
            refine,
        } => beam(
            *n,
            *c,
            p_file.as_deref(),
            r_file.as_deref(),
            *modes,
            *refine,
        ),
    }
}

fn beam(
    n: usize,
    c: f64,
    p_file: Option<&Path>,
    r_file: Option<&Path>,
    modes: usize,
    refine: bool,
) -> RunResult<String> {
    if refine {
        if p_file.is_some() || r_file.is_some() {
            return Err(invalid(
                "--refine uses p = r = 1 and cannot take sample files",
            ));
        }
        let r = beamgrid::refine(n, |_| 1.0, |_| 1.0, c, modes)?;
        let header: Vec<String> = ["k", "lambda_N", "lambda_2N", "lambda_4N", "ratio", "order"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows: Vec<Vec<f64>> = (0..modes)
            .map(|k| {
                vec![
                    k as f64,
                    r.lambdas[0][k],
                    r.lambdas[1][k],
                    r.lambdas[2][k],
                    r.ratios[k],
                    r.orders[k],
                ]
            })
            .collect();
        return Ok(emit_table(Some(&header), &rows)?);
    }
    let p = load_samples(p_file, n)?;
    let r = load_samples(r_file, p.len())?;
    let bp = BeamProblem::from_samples(p, r, c)?;
    let dp = beamgrid::discretize(&bp)?;
    let report = beamgrid::as_pencil_report(&dp);
    info!("{}", report.sign_note);
    if let Some(&index) = report.gamma_failures.first() {
        return Err(Failure::Pencil(PencilError::GammaNotPositive {
            index,
            value: dp.five.gamma(index)?,
        }));
    }
    let found = beamgrid::solve_eigen(&dp, modes)?;
    let mut header = vec!["k".to_string(), "lambda".to_string()];
    header.extend((0..bp.intervals() + 2).map(|j| format!("y{j}")));
    let rows: Vec<Vec<f64>> = found
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let mut row = vec![k as f64, m.lambda];
            row.extend(&m.mode);
            row
        })
        .collect();
    Ok(emit_table(Some(&header), &rows)?)
}

fn init_logging() -> Result<(), Failure> {
    let level = std::env::var("PENCIL_LOG").unwrap_or_else(|_| "info".into());
    let filter = match level.as_str() {
        "quiet" => log::LevelFilter::Off,
        "info" => log::LevelFilter::Info,
        "debug" => log::LevelFilter::Debug,
        other => {
            return Err(invalid(format!(
                "PENCIL_LOG must be quiet, info or debug, not {other:?}"
            )));
        }
    };
    env_logger::Builder::new()
        .filter_level(filter)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    Ok(())
}

fn manifest(cli: &Cli) -> serde_json::Value {
    json!({
        "program": "pencil",
        "version": env!("CARGO_PKG_VERSION"),
        "command": format!("{:?}", cli.command),
        "output": cli.output.as_ref().map(|p| p.display().to_string()),
        "defaults": {"size": DEFAULT_SIZE, "tol": DEFAULT_TOL, "nodes": DEFAULT_NODES},
    })
}

fn fail(f: &Failure) -> ExitCode {
    println!("{}", f.to_json());
    ExitCode::from(f.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = init_logging() {
        return fail(&f);
    }
    info!("manifest {}", manifest(&cli));
    let out = match run(&cli.command) {
        Ok(out) => out,
        Err(f) => {
            log::error!("{}", f.to_json()["message"]);
            return fail(&f);
        }
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, out) {
                return fail(&Failure::Io {
                    path: path.clone(),
                    message: e.to_string(),
                });
            }
        }
        None => print!("{out}"),
    }
    ExitCode::SUCCESS
}
