//! Fixed-layout MPS export.
//!
//! Fields sit at the classic column positions; name fields widen to the
//! longest name in the model so long variable names stay aligned. Every
//! column lists its objective coefficient, so every variable appears even
//! when it is in no row. Binary columns are wrapped in integer markers and
//! bounded by `UP 1`; relaxed peak levels keep `UP 1` without markers.

use std::fmt::Write as _;
use std::path::Path;

use crate::model::{Domain, MilpModel, Sense};

const OBJ: &str = "obj";

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// MPS text of `model`. Identical models give identical bytes.
pub fn write_mps(model: &MilpModel, name: &str) -> String {
    let width = model
        .vars
        .iter()
        .map(|v| v.name.len())
        .chain(model.rows.iter().map(|r| r.name.len()))
        .chain([8, "MARKER0000".len()])
        .max()
        .unwrap_or(8);
    let line = |out: &mut String, code: &str, a: &str, b: &str, c: &str| {
        let row = format!(" {code:<2} {a:<width$}  {b:<width$}  {c}");
        out.push_str(row.trim_end());
        out.push('\n');
    };

    let mut out = String::new();
    writeln!(out, "NAME          {name}").unwrap();
    out.push_str("ROWS\n");
    line(&mut out, "N", OBJ, "", "");
    for r in &model.rows {
        let code = match r.sense {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        };
        line(&mut out, code, &r.name, "", "");
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.vars.len()];
    for (i, r) in model.rows.iter().enumerate() {
        for &(j, c) in &r.terms {
            columns[j].push((i, c));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_marker = false;
    let mut markers = 0;
    for (v, col) in model.vars.iter().zip(&columns) {
        let binary = v.domain == Domain::Binary;
        if binary != in_marker {
            let tag = if binary { "'INTORG'" } else { "'INTEND'" };
            line(
                &mut out,
                "",
                &format!("MARKER{markers:04}"),
                "'MARKER'",
                tag,
            );
            markers += 1;
            in_marker = binary;
        }
        line(&mut out, "", &v.name, OBJ, &num(v.cost));
        for &(i, c) in col {
            line(&mut out, "", &v.name, &model.rows[i].name, &num(c));
        }
    }
    if in_marker {
        line(
            &mut out,
            "",
            &format!("MARKER{markers:04}"),
            "'MARKER'",
            "'INTEND'",
        );
    }

    out.push_str("RHS\n");
    for r in model.rows.iter().filter(|r| r.rhs != 0.0) {
        line(&mut out, "", "RHS", &r.name, &num(r.rhs));
    }

    out.push_str("BOUNDS\n");
    for v in &model.vars {
        let (lo, hi) = (v.lower, v.upper);
        if lo == hi {
            line(&mut out, "FX", "BND", &v.name, &num(lo));
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            line(&mut out, "FR", "BND", &v.name, "");
        } else {
            if lo == f64::NEG_INFINITY {
                line(&mut out, "MI", "BND", &v.name, "");
            } else if lo != 0.0 {
                line(&mut out, "LO", "BND", &v.name, &num(lo));
            }
            if hi != f64::INFINITY {
                line(&mut out, "UP", "BND", &v.name, &num(hi));
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

/// Writes [`write_mps`] output to `path`.
pub fn export_mps(model: &MilpModel, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, write_mps(model, "saasched"))
}
