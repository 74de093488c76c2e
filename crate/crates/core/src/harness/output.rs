//! CSV and JSON writers. Floats are written with 17 significant digits so
//! that files round-trip exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::lyapunov::{ConservationReport, Direction};
use crate::shadowing::{IterationRecord, ShadowingResult};

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn finish(mut w: csv::Writer<fs::File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

pub fn write_shadow_csv(path: &Path, res: &ShadowingResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["n", "delta_n", "defect_n", "deviation", "bound", "pass"])?;
    for d in &res.deviations {
        w.write_record([
            d.n.to_string(),
            fmt_f64(d.delta),
            fmt_f64(d.defect),
            fmt_f64(d.deviation),
            fmt_f64(d.bound),
            d.pass.to_string(),
        ])?;
    }
    finish(w)
}

pub fn write_iterations_csv(path: &Path, trace: &[IterationRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["k", "step_norm", "z_norm"])?;
    for r in trace {
        w.write_record([r.k.to_string(), fmt_f64(r.step_norm), fmt_f64(r.z_norm)])?;
    }
    finish(w)
}

/// One row of `lyapunov.csv`.
#[derive(Clone, Debug)]
pub struct LyapunovRow {
    pub orbit_id: String,
    pub direction: String,
    pub steps: usize,
    pub exponent: f64,
    pub residual: f64,
}

impl LyapunovRow {
    pub fn new(orbit_id: impl Into<String>, direction: Direction, steps: usize, exponent: f64, residual: f64) -> Self {
        LyapunovRow {
            orbit_id: orbit_id.into(),
            direction: direction.label().into(),
            steps,
            exponent,
            residual,
        }
    }
}

pub fn write_lyapunov_csv(path: &Path, rows: &[LyapunovRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["orbit_id", "direction", "N", "exponent", "residual"])?;
    for r in rows {
        w.write_record([
            r.orbit_id.clone(),
            r.direction.clone(),
            r.steps.to_string(),
            fmt_f64(r.exponent),
            fmt_f64(r.residual),
        ])?;
    }
    finish(w)
}

/// Match table: one row per forward check and per converse sample.
pub fn write_conservation_csv(path: &Path, rep: &ConservationReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["part", "id", "direction", "observed", "linear", "pass"])?;
    for r in &rep.forward {
        w.write_record([
            "forward".to_string(),
            r.index.to_string(),
            r.checked.label().to_string(),
            fmt_f64(r.observed.value),
            fmt_f64(r.linear),
            r.pass.to_string(),
        ])?;
    }
    for r in &rep.converse {
        let (dir, observed, linear) = match r.matched {
            Some((d, l)) => {
                let obs = if d == Direction::Forward { r.lambda_plus } else { r.lambda_minus };
                (d.label(), obs, l)
            }
            None => ("none", r.lambda_plus, f64::NAN),
        };
        w.write_record([
            "converse".to_string(),
            r.id.to_string(),
            dir.to_string(),
            fmt_f64(observed),
            fmt_f64(linear),
            r.pass.to_string(),
        ])?;
    }
    finish(w)
}

/// A two-column CSV of named checks.
pub fn write_checks_csv(path: &Path, rows: &[(String, String, bool, String)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["scenario", "check", "pass", "detail"])?;
    for (s, c, p, d) in rows {
        w.write_record([s.as_str(), c.as_str(), if *p { "true" } else { "false" }, d.as_str()])?;
    }
    finish(w)
}

pub fn write_summary(path: &Path, summary: &impl Serialize) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| crate::Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn output_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
