//! JSON documents and CSV tables.
//!
//! Schema errors carry a JSON pointer to the offending value. CSV output uses
//! Rust's shortest round-trip float formatting, which is locale independent
//! and parses back to the identical `f64`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_path_to_error::{Path, Segment};

use crate::error::{PencilError, Result};
use crate::measure::{Measure, MeasureKind};
use crate::operator::{Basis, OperatorMatrix};
use crate::pencil::{FiveDiagMatrix, JacobiMatrix, Pencil, Tail};
use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilDoc {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub alpha5: Vec<f64>,
    pub beta5: Vec<f64>,
    pub gamma5: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub tail: Tail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacobiDoc {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub tail: Tail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureDoc {
    Atoms {
        points: Vec<[f64; 2]>,
    },
    ChebyshevU {
        center: f64,
    },
    Jacobi {
        a: Vec<f64>,
        b: Vec<f64>,
        order: usize,
        #[serde(default)]
        tail: Tail,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiDoc {
    pub columns: Vec<Vec<f64>>,
}

/// Input of the perturbation family `J5 = a J3^2 + b J3 + d e0 e0^T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialDoc {
    pub j3: JacobiDoc,
    pub measure: MeasureDoc,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    /// Rows of the equivalent general pencil.
    #[serde(default = "default_special_size")]
    pub size: usize,
}

fn default_special_size() -> usize {
    16
}

fn pointer_of(path: &Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

/// Deserializes `text`, reporting failures with a JSON pointer.
pub fn parse_doc<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| PencilError::InvalidInput {
        pointer: pointer_of(e.path()),
        message: e.inner().to_string(),
    })
}

fn nested(err: PencilError, prefix: &str) -> PencilError {
    match err {
        PencilError::InvalidInput { pointer, message } => PencilError::InvalidInput {
            pointer: format!("{prefix}{pointer}"),
            message,
        },
        other => other,
    }
}

impl PencilDoc {
    pub fn into_pencil(self) -> Result<Pencil> {
        let j3 = JacobiMatrix::new(self.a, self.b, self.tail)?;
        let j5 = FiveDiagMatrix::new(self.alpha5, self.beta5, self.gamma5, self.tail)?;
        if !self.alpha.is_finite() {
            return Err(PencilError::InvalidInput {
                pointer: "/alpha".into(),
                message: "alpha is not finite".into(),
            });
        }
        Ok(Pencil::new(j3, j5, self.alpha, self.beta))
    }

    /// Both matrices must share one tail rule to be representable.
    pub fn from_pencil(theta: &Pencil) -> Result<PencilDoc> {
        if theta.j3.tail() != theta.j5.tail() {
            return Err(PencilError::InvalidPencil(
                "J3 and J5 use different tail rules".into(),
            ));
        }
        Ok(PencilDoc {
            a: theta.j3.a_band().to_vec(),
            b: theta.j3.b_band().to_vec(),
            alpha5: theta.j5.alpha_band().to_vec(),
            beta5: theta.j5.beta_band().to_vec(),
            gamma5: theta.j5.gamma_band().to_vec(),
            alpha: theta.alpha,
            beta: theta.beta,
            tail: theta.j3.tail(),
        })
    }
}

impl JacobiDoc {
    pub fn into_jacobi(self) -> Result<JacobiMatrix> {
        JacobiMatrix::new(self.a, self.b, self.tail)
    }
}

impl MeasureDoc {
    pub fn into_measure(self) -> Result<Measure> {
        match self {
            MeasureDoc::Atoms { points } => {
                Measure::atoms(points.into_iter().map(|[x, w]| (x, w)).collect())
            }
            MeasureDoc::ChebyshevU { center } => Measure::chebyshev_u(center),
            MeasureDoc::Jacobi { a, b, order, tail } => {
                Measure::jacobi(JacobiMatrix::new(a, b, tail)?, order)
            }
        }
    }

    pub fn from_measure(m: &Measure) -> MeasureDoc {
        match m.kind() {
            MeasureKind::Atoms(points) => MeasureDoc::Atoms {
                points: points.iter().map(|&(x, w)| [x, w]).collect(),
            },
            MeasureKind::ChebyshevU { center } => MeasureDoc::ChebyshevU { center: *center },
            MeasureKind::JacobiGenerated { jacobi, order } => MeasureDoc::Jacobi {
                a: jacobi.a_band().to_vec(),
                b: jacobi.b_band().to_vec(),
                order: *order,
                tail: jacobi.tail(),
            },
        }
    }
}

impl XiDoc {
    /// Columns in the monomial basis; column `k` has at most `k + 2` entries.
    pub fn into_operator(self) -> Result<OperatorMatrix> {
        for (k, col) in self.columns.iter().enumerate() {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(PencilError::InvalidInput {
                    pointer: format!("/columns/{k}/{i}"),
                    message: "entry is not finite".into(),
                });
            }
        }
        OperatorMatrix::new(self.columns, Basis::Monomial)
    }

    pub fn from_operator(xi: &OperatorMatrix) -> XiDoc {
        XiDoc {
            columns: xi
                .columns()
                .iter()
                .enumerate()
                .map(|(k, col)| col.iter().take(k + 2).copied().collect())
                .collect(),
        }
    }
}

pub fn parse_pencil(text: &str) -> Result<Pencil> {
    parse_doc::<PencilDoc>(text)?.into_pencil()
}

pub fn parse_measure(text: &str) -> Result<Measure> {
    parse_doc::<MeasureDoc>(text)?.into_measure()
}

pub fn parse_xi(text: &str) -> Result<OperatorMatrix> {
    parse_doc::<XiDoc>(text)?.into_operator()
}

pub fn parse_special(text: &str) -> Result<(SpecialDoc, JacobiMatrix, Measure)> {
    let doc: SpecialDoc = parse_doc(text)?;
    let j3 = doc.j3.clone().into_jacobi().map_err(|e| nested(e, "/j3"))?;
    let m = doc
        .measure
        .clone()
        .into_measure()
        .map_err(|e| nested(e, "/measure"))?;
    Ok((doc, j3, m))
}

pub fn pencil_json(theta: &Pencil) -> Result<String> {
    let doc = PencilDoc::from_pencil(theta)?;
    serde_json::to_string_pretty(&doc).map_err(|e| PencilError::NumericalFailure(e.to_string()))
}

/// Formats one value in shortest round-trip form.
pub fn fmt_f64(x: f64) -> String {
    // adding 0.0 maps -0.0 to 0.0
    format!("{:?}", x + 0.0)
}

/// Renders a rectangular table with header `v0, v1, ...` unless one is given.
pub fn emit_table(header: Option<&[String]>, rows: &[Vec<f64>]) -> Result<String> {
    let width = match (header, rows.first()) {
        (Some(h), _) => h.len(),
        (None, Some(r)) => r.len(),
        (None, None) => 0,
    };
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(PencilError::InvalidInput {
            pointer: format!("/{i}"),
            message: format!("row has {} entries, expected {width}", rows[i].len()),
        });
    }
    let mut out = String::new();
    let names: Vec<String> = match header {
        Some(h) => h.to_vec(),
        None => (0..width).map(|i| format!("v{i}")).collect(),
    };
    out.push_str(&names.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Parses a table written by [`emit_table`]: header line, then numeric rows.
pub fn parse_table(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = match lines.next() {
        Some(h) => h.split(',').map(|s| s.trim().to_string()).collect(),
        None => {
            return Err(PencilError::InvalidInput {
                pointer: "/".into(),
                message: "empty table".into(),
            })
        }
    };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .enumerate()
            .map(|(j, cell)| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|e| PencilError::InvalidInput {
                        pointer: format!("/{i}/{j}"),
                        message: format!("{cell:?}: {e}"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(PencilError::InvalidInput {
                pointer: format!("/{i}"),
                message: format!("row has {} entries, header has {}", row.len(), header.len()),
            });
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Polynomial dump: one row per polynomial, `n, c0, ..., cN` low to high.
pub fn emit_polys(polys: &[Poly]) -> Result<String> {
    let top = polys.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
    let mut header = vec!["n".to_string()];
    header.extend((0..=top).map(|i| format!("c{i}")));
    let rows: Vec<Vec<f64>> = polys
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let mut row = vec![n as f64];
            row.extend(p.padded(top + 1));
            row
        })
        .collect();
    emit_table(Some(&header), &rows)
}

/// Reads a single-column sample file (header plus one value per line).
pub fn parse_samples(text: &str) -> Result<Vec<f64>> {
    let (header, rows) = parse_table(text)?;
    if header.len() != 1 {
        return Err(PencilError::InvalidInput {
            pointer: "/".into(),
            message: format!("expected one column, found {}", header.len()),
        });
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_one_by_one() {
        assert_eq!(emit_table(None, &[vec![1.0]]).unwrap(), "v0\n1.0\n");
    }

    #[test]
    fn pointer_for_bad_band_entry() {
        let text = r#"{"a":[1.0],"b":[0.0,"x"],"alpha5":[1,1],"beta5":[0],"gamma5":[],"alpha":1,"beta":0}"#;
        match parse_pencil(text) {
            Err(PencilError::InvalidInput { pointer, .. }) => assert_eq!(pointer, "/b/1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let text = r#"{"type":"chebyshev_u","center":0,"radius":2}"#;
        assert!(matches!(
            parse_measure(text),
            Err(PencilError::InvalidInput { .. })
        ));
    }

    #[test]
    fn ragged_table_rejected() {
        assert!(emit_table(None, &[vec![1.0, 2.0], vec![3.0]]).is_err());
    }
}
