use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pencil_core::inverse::model_representation;
use pencil_core::io::{parse_pencil, parse_table, MeasureDoc, PencilDoc, XiDoc};
use pencil_core::{FiveDiagMatrix, JacobiMatrix, Measure, Pencil, Tail};
use serde_json::Value;
use tempfile::TempDir;

const EXAMPLE: &str = r#"{"a":[1.0],"b":[3.0],"alpha5":[1.0],"beta5":[0.0],"gamma5":[1.0],"alpha":1.0,"beta":0.0,"tail":"constant"}"#;
const SPECIAL: &str = r#"{"j3":{"a":[0.282842712474619],"b":[0.4],"tail":"constant"},"measure":{"type":"jacobi","a":[0.282842712474619],"b":[0.4],"order":64,"tail":"constant"},"a":2.5,"b":-2.0,"d":0.2}"#;

fn pencil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pencil"))
        .args(args)
        .env("PENCIL_LOG", "quiet")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output) -> Value {
    serde_json::from_str(stdout(o).trim()).unwrap()
}

#[test]
fn validate_example() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "t.json", EXAMPLE);
    let o = pencil(&["validate", "--pencil", arg(&t)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "valid");
}

#[test]
fn validate_reports_negative_gamma() {
    let dir = TempDir::new().unwrap();
    let t = write(
        &dir,
        "t.json",
        &EXAMPLE.replace(r#""gamma5":[1.0]"#, r#""gamma5":[-1.0]"#),
    );
    let o = pencil(&["validate", "--pencil", arg(&t)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["pointer"], "/gamma5/0");
}

#[test]
fn schema_error_has_pointer() {
    let dir = TempDir::new().unwrap();
    let t = write(
        &dir,
        "t.json",
        &EXAMPLE.replace(r#""b":[3.0]"#, r#""b":[3.0,"x"]"#),
    );
    let o = pencil(&["poly", "--pencil", arg(&t)]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    assert_eq!(e["code"], "INVALID_INPUT");
    assert_eq!(e["pointer"], "/b/1");
}

#[test]
fn missing_file_is_io_error() {
    let o = pencil(&["validate", "--pencil", "/nonexistent/t.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["code"], "IO_ERROR");
}

#[test]
fn poly_second_row() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "t.json", EXAMPLE);
    let o = pencil(&["poly", "--pencil", arg(&t), "--max-degree", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = parse_table(&stdout(&o)).unwrap();
    assert_eq!(header, ["n", "c0", "c1", "c2"]);
    assert_eq!(rows[2], vec![2.0, -1.0, 3.0, 1.0]);
}

#[test]
fn spectral_gram_is_identity() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "t.json", EXAMPLE);
    let out = dir.path().join("gram.csv");
    let o = pencil(&[
        "spectral",
        "--pencil",
        arg(&t),
        "--max-degree",
        "5",
        "--output",
        arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = parse_table(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(header.len(), 6);
    assert_eq!(rows.len(), 6);
    for (i, row) in rows.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((x - target).abs() <= 1e-8);
        }
    }
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let sp = write(&dir, "sp.json", SPECIAL);
    let a = pencil(&["riesz", "--special", arg(&sp), "--poly", "1,-0.5,2"]);
    let b = pencil(&["riesz", "--special", arg(&sp), "--poly", "1,-0.5,2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn inverse_round_trip_through_files() {
    let theta = Pencil::new(
        JacobiMatrix::constant(1.0, 2.5),
        FiveDiagMatrix::new(vec![-1.0], vec![0.0], vec![1.0], Tail::Constant).unwrap(),
        1.0,
        0.0,
    );
    let m = Measure::chebyshev_u(2.5).unwrap();
    let op = model_representation(&theta, &m, 10).unwrap();
    let dir = TempDir::new().unwrap();
    let mp = write(
        &dir,
        "m.json",
        &serde_json::to_string(&MeasureDoc::from_measure(&m)).unwrap(),
    );
    let xp = write(
        &dir,
        "xi.json",
        &serde_json::to_string(&XiDoc::from_operator(op.xi())).unwrap(),
    );
    let o = pencil(&[
        "inverse",
        "--measure",
        arg(&mp),
        "--xi",
        arg(&xp),
        "--size",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["admissibility"]["symmetric"], true);
    let back = parse_pencil(&v["pencil"].to_string()).unwrap();
    for k in 0..=6 {
        assert!((back.j5.alpha(k).unwrap() - theta.j5.alpha(k).unwrap()).abs() < 1e-8);
        assert!((back.j5.gamma(k).unwrap() - 1.0).abs() < 1e-8);
        assert!((back.j3.b(k).unwrap() - 2.5).abs() < 1e-8);
    }
    assert!((back.alpha - 1.0).abs() < 1e-8 && back.beta.abs() < 1e-8);
    let _: PencilDoc = serde_json::from_value(v["pencil"].clone()).unwrap();
}

#[test]
fn inverse_rejects_negative_leading_entry() {
    let dir = TempDir::new().unwrap();
    let mp = write(&dir, "m.json", r#"{"type":"chebyshev_u","center":0.0}"#);
    let xp = write(
        &dir,
        "xi.json",
        r#"{"columns":[[0.0,-1.0],[0.0,0.0,1.0],[0.0,0.0,0.0,1.0],[0,0,0,0,1]]}"#,
    );
    let o = pencil(&[
        "inverse",
        "--measure",
        arg(&mp),
        "--xi",
        arg(&xp),
        "--size",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["code"], "NOT_ADMISSIBLE");
}

#[test]
fn resolvent_vector_and_divergence() {
    let dir = TempDir::new().unwrap();
    let sp = write(&dir, "sp.json", SPECIAL);
    let o = pencil(&[
        "resolvent",
        "--special",
        arg(&sp),
        "--z",
        "7,1",
        "--size",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["coefficients"].as_array().unwrap().len(), 4);
    let o = pencil(&["resolvent", "--special", arg(&sp), "--z", "-2,0.5"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["code"], "SERIES_DIVERGENT");
}

#[test]
fn riesz_log_csv() {
    let dir = TempDir::new().unwrap();
    let sp = write(&dir, "sp.json", SPECIAL);
    let log = dir.path().join("log.csv");
    let o = pencil(&[
        "riesz",
        "--special",
        arg(&sp),
        "--poly",
        "0,1",
        "--nodes",
        "8",
        "--log",
        arg(&log),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = parse_table(&fs::read_to_string(&log).unwrap()).unwrap();
    assert_eq!(header, ["M", "delta"]);
    assert_eq!(rows[0][0], 16.0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // x(Â) e0 = b e0 + a e1
    assert!((v["vector"][0][0].as_f64().unwrap() + 2.0).abs() < 1e-8);
    assert!((v["vector"][1][0].as_f64().unwrap() - 2.5).abs() < 1e-8);
}

#[test]
fn nonpositive_tolerance_rejected() {
    let dir = TempDir::new().unwrap();
    let sp = write(&dir, "sp.json", SPECIAL);
    let o = pencil(&["riesz", "--special", arg(&sp), "--poly", "1", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["code"], "INVALID_PARAMETER");
}

#[test]
fn beam_table_ascending() {
    let o = pencil(&["beam", "--n", "40", "--c", "0", "--modes", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = parse_table(&stdout(&o)).unwrap();
    assert_eq!(&header[..3], ["k", "lambda", "y0"]);
    assert_eq!(header.len(), 2 + 42);
    assert_eq!(
        rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
        vec![0.0, 1.0, 2.0]
    );
    assert!(rows[0][1] < rows[1][1] && rows[1][1] < rows[2][1]);
    assert!((rows[0][1] - 4.0 * std::f64::consts::PI.powi(2)).abs() < 0.05 * 40.0);
}

#[test]
fn beam_refine_orders() {
    let o = pencil(&["beam", "--n", "20", "--c", "0", "--modes", "1", "--refine"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = parse_table(&stdout(&o)).unwrap();
    assert_eq!(header.last().unwrap(), "order");
    assert!((1.7..2.3).contains(&rows[0][5]));
}

#[test]
fn beam_zero_stiffness_sample_reported() {
    let dir = TempDir::new().unwrap();
    let mut samples = String::from("p\n");
    for j in 0..12 {
        samples.push_str(if j == 6 { "0.0\n" } else { "1.0\n" });
    }
    let p = write(&dir, "p.csv", &samples);
    let o = pencil(&["beam", "--c", "0", "--p-file", arg(&p)]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    assert_eq!(e["code"], "GAMMA_NOT_POSITIVE");
    assert!(e["message"].as_str().unwrap().contains("gamma_4"));
}

#[test]
fn bad_log_level_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_pencil"))
        .args(["beam", "--c", "0"])
        .env("PENCIL_LOG", "loud")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn manifest_on_stderr() {
    let o = Command::new(env!("CARGO_BIN_EXE_pencil"))
        .args(["beam", "--c", "0"])
        .env("PENCIL_LOG", "info")
        .output()
        .unwrap();
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("manifest"));
    assert!(
        err.contains(r#""nodes":256"#)
            && err.contains(r#""tol":1e-9"#)
            && err.contains(r#""size":16"#)
    );
}
