//! Dataset ingestion and numeric CSV emission.

use std::fmt::Write as _;
use std::path::Path;

use viscokit::calibration::{DataPoint, Dataset};

use crate::error::{CliError, CliResult};

pub const DATASET_HEADER: [&str; 3] = ["time", "stretch", "nominal_stress_kPa"];

/// Reads `time,stretch,nominal_stress_kPa` records; `#` starts a comment line.
pub fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let data_err = |line: u64, message: String| CliError::Data { path: path.to_path_buf(), line, message };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data_err(0, e.to_string()))?;
    let header = rdr.headers().map_err(|e| data_err(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != DATASET_HEADER {
        let line = header.position().map_or(1, |p| p.line());
        return Err(data_err(line, format!("expected header `{}`", DATASET_HEADER.join(","))));
    }
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| data_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(data_err(line, format!("expected 3 fields, found {}", rec.len())));
        }
        let field = |i: usize| -> CliResult<f64> {
            let v: f64 = rec[i].parse().map_err(|_| data_err(line, format!("`{}` is not a number", &rec[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(data_err(line, format!("`{}` is not finite", &rec[i])))
            }
        };
        let p = DataPoint { time: field(0)?, stretch: field(1)?, stress: field(2)? };
        if !(p.stretch > 0.0) {
            return Err(data_err(line, "stretch must be positive".into()));
        }
        if let Some(prev) = points.last().map(|q: &DataPoint| q.time) {
            if !(p.time > prev) {
                return Err(data_err(line, "time must increase".into()));
            }
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(data_err(header.position().map_or(1, |p| p.line()), "no data records".into()));
    }
    let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    Dataset::from_points(label, points).map_err(|e| data_err(0, e.to_string()))
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn push_row(out: &mut String, cells: &[String]) {
    let _ = writeln!(out, "{}", cells.join(","));
}
