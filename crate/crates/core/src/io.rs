//! Text formats: envelopes as CSV, retrieval sidecars as JSON and tabulated
//! hole profiles.
//!
//! Numbers are written in Rust's shortest round-trip form, so output is
//! byte-identical for identical inputs and re-reads losslessly.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::medium::TabulatedHole;
use crate::propagation::SampledEnvelope;
use crate::storage::{RetrievalResult, Validity};

pub const ENVELOPE_HEADER: &str = "# t, re, im";
pub const RESTORED_HEADER: &str = "# t_minus_tpi2, re, im";
pub const HOLE_HEADER: &str = "# delta_over_delta0, g";

/// Write `time, re, im` rows under `header`.
pub fn write_envelope<W: Write>(mut w: W, env: &SampledEnvelope, header: &str) -> Result<()> {
    writeln!(w, "{header}")?;
    for (t, a) in env.times().zip(&env.samples) {
        writeln!(w, "{t:e}, {:e}, {:e}", a.re, a.im)?;
    }
    Ok(())
}

/// Write `time, re, im` rows from explicit columns.
pub fn write_columns<W: Write>(mut w: W, header: &str, times: &[f64], values: &[Complex64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::Config("time and value columns differ in length".into()));
    }
    writeln!(w, "{header}")?;
    for (t, a) in times.iter().zip(values) {
        writeln!(w, "{t:e}, {:e}, {:e}", a.re, a.im)?;
    }
    Ok(())
}

/// Read an envelope written by [`write_envelope`]; the time column must be uniform.
pub fn read_envelope<R: BufRead>(r: R) -> Result<SampledEnvelope> {
    let rows = read_rows(r, 3)?;
    if rows.len() < 2 {
        return Err(Error::Parse("an envelope needs at least two samples".into()));
    }
    let t0 = rows[0][0];
    let dt = (rows[rows.len() - 1][0] - t0) / (rows.len() - 1) as f64;
    for (i, row) in rows.iter().enumerate() {
        let expected = t0 + i as f64 * dt;
        if (row[0] - expected).abs() > 1e-9 * dt.abs().max(expected.abs()) {
            return Err(Error::Parse(format!("time column not uniform at row {}", i + 1)));
        }
    }
    SampledEnvelope::new(t0, dt, rows.iter().map(|r| Complex64::new(r[1], r[2])).collect())
}

/// Read a tabulated hole: detuning in units of `delta0` and `g`, separated
/// by a comma or whitespace.
pub fn read_hole_profile<R: BufRead>(r: R) -> Result<TabulatedHole> {
    let rows = read_rows(r, 2)?;
    let (x, g) = rows.iter().map(|r| (r[0], r[1])).unzip();
    TabulatedHole::new(x, g)
}

pub fn write_hole_profile<W: Write>(mut w: W, hole: &TabulatedHole) -> Result<()> {
    writeln!(w, "{HOLE_HEADER}")?;
    let (x, g) = hole.samples();
    for (a, b) in x.iter().zip(g) {
        writeln!(w, "{a:e}, {b:e}")?;
    }
    Ok(())
}

fn read_rows<R: BufRead>(r: R, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: '{s}' is not a number", n + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != columns {
            return Err(Error::Parse(format!(
                "line {}: expected {columns} columns, found {}",
                n + 1,
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("line {}: non-finite value", n + 1)));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// JSON companion of a restored-pulse CSV.
#[derive(Debug, Serialize)]
pub struct Sidecar<'a, P: Serialize> {
    pub method: String,
    pub eta: f64,
    pub params: &'a P,
    pub validity: &'a Validity,
}

pub fn write_sidecar<W: Write, P: Serialize>(mut w: W, result: &RetrievalResult, params: &P) -> Result<()> {
    let sidecar = Sidecar {
        method: result.method.label(),
        eta: result.efficiency,
        params,
        validity: &result.validity,
    };
    serde_json::to_writer_pretty(&mut w, &sidecar).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}
