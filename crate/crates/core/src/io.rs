//! CSV snapshot and diagnostics files.
//!
//! Numbers are written as `{:.16e}` (17 significant digits), which
//! round-trips every finite `f64`.

use std::io::Write;

use num_complex::Complex64;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::splitstep::FieldPair;

pub const SNAPSHOT_HEADER: &str = "x,re_u1,im_u1,re_u2,im_u2";
pub const DIAGNOSTICS_HEADER: &str = "t,M1,M2,E,P,Ploc1,Ploc2";

/// Parsed snapshot columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub x: Vec<f64>,
    pub u1: Vec<Complex64>,
    pub u2: Vec<Complex64>,
}

pub fn write_snapshot<W: Write>(mut w: W, pair: &FieldPair, grid: &GridSpec) -> Result<()> {
    pair.check(grid)?;
    writeln!(w, "{SNAPSHOT_HEADER}")?;
    for ((x, a), b) in grid.nodes().iter().zip(&pair.u1).zip(&pair.u2) {
        writeln!(
            w,
            "{x:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            a.re, a.im, b.re, b.im
        )?;
    }
    Ok(())
}

pub fn write_diagnostics_header<W: Write>(mut w: W) -> Result<()> {
    writeln!(w, "{DIAGNOSTICS_HEADER}")?;
    Ok(())
}

pub fn write_diagnostics_row<W: Write>(mut w: W, r: &DiagnosticsRecord) -> Result<()> {
    writeln!(
        w,
        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        r.t, r.m1, r.m2, r.energy, r.momentum, r.ploc1, r.ploc2
    )?;
    Ok(())
}

fn parse_rows<const K: usize>(text: &str, header: &str) -> Result<Vec<[f64; K]>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((i, h)) => {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected header `{header}`, got `{}`", h.trim()),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty file".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let mut row = [0.0; K];
        let mut fields = line.split(',');
        for (col, slot) in row.iter_mut().enumerate() {
            let field = fields.next().ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected {K} columns, got {col}"),
            })?;
            *slot = field.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("column {}: invalid number `{}`", col + 1, field.trim()),
            })?;
        }
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected {K} columns, got more"),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot> {
    let rows = parse_rows::<5>(text, SNAPSHOT_HEADER)?;
    let mut snap = Snapshot {
        x: Vec::with_capacity(rows.len()),
        u1: Vec::with_capacity(rows.len()),
        u2: Vec::with_capacity(rows.len()),
    };
    for [x, a, b, c, d] in rows {
        snap.x.push(x);
        snap.u1.push(Complex64::new(a, b));
        snap.u2.push(Complex64::new(c, d));
    }
    Ok(snap)
}

pub fn parse_diagnostics(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    Ok(parse_rows::<7>(text, DIAGNOSTICS_HEADER)?
        .into_iter()
        .map(
            |[t, m1, m2, energy, momentum, ploc1, ploc2]| DiagnosticsRecord {
                t,
                m1,
                m2,
                energy,
                momentum,
                ploc1,
                ploc2,
            },
        )
        .collect())
}
