//! Output formats.
//!
//! CSV files have a header row and a fixed column order. Floats are written
//! as `{:.16e}` (17 significant digits, no locale dependence); missing values
//! are empty fields.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wpe_core::sweep::{SweepResult, VelocityRow};
use wpe_core::Trajectory;

use crate::CliError;

pub const TRAJECTORY_COLUMNS: [&str; 5] = ["t", "x", "X", "Y", "Z"];
pub const SWEEP_COLUMNS: [&str; 6] = ["axis1", "axis2", "class", "avg_speed", "lle", "error"];
pub const VELOCITY_COLUMNS: [&str; 6] = ["B", "X0", "avg_speed", "avg_speed_normalized", "class", "error"];
pub const BOUNDARY_COLUMNS: [&str; 2] = ["sigma", "r_c"];

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
}

pub fn trajectory_csv(traj: &Trajectory<4>) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &TRAJECTORY_COLUMNS,
        traj.times().iter().zip(traj.states()).map(|(t, s)| {
            std::iter::once(*t).chain(s.iter().copied()).map(fmt_f64).collect()
        }),
    )
}

pub fn sweep_csv(res: &SweepResult) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &SWEEP_COLUMNS,
        res.cells.iter().map(|c| {
            let (class, speed, lle, err) = match &c.outcome {
                Ok(o) => (o.class.as_str().to_string(), fmt_f64(o.avg_speed), fmt_opt(o.lle), String::new()),
                Err(e) => (String::new(), String::new(), String::new(), e.clone()),
            };
            vec![fmt_f64(c.axis1), fmt_f64(c.axis2), class, speed, lle, err]
        }),
    )
}

pub fn velocity_csv(rows: &[VelocityRow]) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &VELOCITY_COLUMNS,
        rows.iter().map(|r| {
            let (class, err) = match &r.class {
                Ok(c) => (c.as_str().to_string(), String::new()),
                Err(e) => (String::new(), e.clone()),
            };
            let speed = if r.class.is_ok() { fmt_f64(r.avg_speed) } else { String::new() };
            vec![fmt_f64(r.b), fmt_f64(r.v0), speed, fmt_opt(r.avg_speed_normalized), class, err]
        }),
    )
}

pub fn boundary_csv(points: &[(f64, f64)]) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &BOUNDARY_COLUMNS,
        points.iter().map(|&(s, r)| vec![fmt_f64(s), fmt_f64(r)]),
    )
}

/// Pretty JSON with a trailing newline; key order follows field order.
pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(bytes).map_err(io_err(path))
}

/// `<output>.provenance.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".provenance.json");
    output.with_file_name(name)
}

/// `<stem>.boundary.csv` next to `output`.
pub fn boundary_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|n| n.to_os_string()).unwrap_or_default();
    let mut name = stem;
    name.push(".boundary.csv");
    output.with_file_name(name)
}
