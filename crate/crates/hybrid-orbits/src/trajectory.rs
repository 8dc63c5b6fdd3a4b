//! Trajectory CSV: one row per grid node, radians plus degree columns.

use std::io::{Read, Write};
use std::path::Path;

use hybrid_orbits_core::integrate::{Curve, TimeGrid};
use hybrid_orbits_core::Vector;

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Format(String),
}

const STATE_COLS: [&str; 6] = ["th1", "th2", "th3", "dth1", "dth2", "dth3"];
const INPUT_COLS: [&str; 2] = ["u1", "u2"];

/// Twelve significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn header(n_inputs: usize) -> Result<Vec<String>, CsvError> {
    if !(INPUT_COLS.len()..=INPUT_COLS.len() + 1).contains(&n_inputs) {
        return Err(CsvError::Format(format!("expected 2 or 3 inputs, got {n_inputs}")));
    }
    let mut h = vec!["t".to_string()];
    h.extend(STATE_COLS.iter().map(|s| s.to_string()));
    h.extend(INPUT_COLS.iter().map(|s| s.to_string()));
    if n_inputs > INPUT_COLS.len() {
        h.push("u_emb".into());
    }
    h.extend(STATE_COLS.iter().map(|s| format!("{s}_deg")));
    Ok(h)
}

pub fn write_trajectory<W: Write>(curve: &Curve, out: W) -> Result<(), CsvError> {
    if curve.state_dim() != STATE_COLS.len() {
        return Err(CsvError::Format(format!("expected 6 states, got {}", curve.state_dim())));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(curve.input_dim())?)?;
    for (k, t) in curve.grid.times().enumerate() {
        let x = &curve.states[k];
        let rad: Vec<String> = x.iter().map(|v| fmt_num(*v)).collect();
        let mut row = vec![fmt_num(t)];
        row.extend(rad.iter().cloned());
        row.extend(curve.inputs[k].iter().map(|v| fmt_num(*v)));
        // Degrees of the printed radians, so that re-exporting a parsed file
        // reproduces it.
        row.extend(rad.iter().map(|r| fmt_num(r.parse::<f64>().expect("formatted float").to_degrees())));
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| CsvError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

pub fn export_trajectory(curve: &Curve, path: &Path) -> Result<(), CsvError> {
    let file = std::fs::File::create(path).map_err(|source| CsvError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_trajectory(curve, std::io::BufWriter::new(file))
}

/// Reads the radian columns back; the grid comes from the last time and
/// the row count and must match the time column.
pub fn read_trajectory<R: Read>(input: R) -> Result<Curve, CsvError> {
    let mut r = csv::Reader::from_reader(input);
    let head: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let n_inputs = if head.iter().any(|h| h == "u_emb") { 3 } else { 2 };
    if head != header(n_inputs)? {
        return Err(CsvError::Format(format!("unexpected header {head:?}")));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut inputs = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CsvError::Format(format!("row {}: {e}", i + 1)))?;
        times.push(vals[0]);
        states.push(Vector::from_column_slice(&vals[1..7]));
        inputs.push(Vector::from_column_slice(&vals[7..7 + n_inputs]));
    }
    if times.len() < 2 {
        return Err(CsvError::Format("need at least two rows".into()));
    }
    let grid = TimeGrid::new(*times.last().unwrap(), times.len() - 1)
        .map_err(|e| CsvError::Format(format!("time grid: {e}")))?;
    let tol = 1e-9 * grid.horizon();
    if let Some(k) = grid.times().zip(&times).position(|(a, b)| (a - b).abs() > tol) {
        return Err(CsvError::Format(format!("row {}: time column is not uniform", k + 1)));
    }
    Curve::new(grid, states, inputs).map_err(|e| CsvError::Format(e.to_string()))
}

pub fn parse_trajectory(path: &Path) -> Result<Curve, CsvError> {
    let file = std::fs::File::open(path).map_err(|source| CsvError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_trajectory(std::io::BufReader::new(file))
}
