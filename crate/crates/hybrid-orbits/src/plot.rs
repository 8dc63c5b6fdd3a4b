//! Per-panel plot data: one CSV per angle and actuated input, all series on
//! the common time grid.

use std::path::{Path, PathBuf};

use hybrid_orbits_core::integrate::Curve;

use crate::trajectory::{fmt_num, CsvError};

/// Panel names; angles are written in degrees, inputs in N m.
pub const PANELS: [&str; 5] = ["th1", "th2", "th3", "u1", "u2"];

/// The sample script shipped next to the data.
pub const PLOT_SCRIPT: &str = include_str!("../scripts/plot_panels.py");

#[derive(Debug, Clone, Copy)]
pub struct PlotSeries<'a> {
    pub name: &'a str,
    pub curve: &'a Curve,
}

fn panel_value(curve: &Curve, panel: usize, k: usize) -> f64 {
    match panel {
        0..=2 => curve.states[k][panel].to_degrees(),
        _ => curve.inputs[k][panel - 3],
    }
}

/// Writes `<dir>/<panel>.csv` for every panel plus the plotting script.
pub fn emit_plot_data(dir: &Path, series: &[PlotSeries<'_>]) -> Result<Vec<PathBuf>, CsvError> {
    let Some(first) = series.first() else {
        return Err(CsvError::Format("no series to plot".into()));
    };
    let grid = first.curve.grid;
    if let Some(s) = series.iter().find(|s| s.curve.grid != grid) {
        return Err(CsvError::Format(format!("series {} is on a different grid", s.name)));
    }
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CsvError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    for (p, name) in PANELS.iter().enumerate() {
        let path = dir.join(format!("{name}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        let mut head = vec!["t".to_string()];
        head.extend(series.iter().map(|s| s.name.to_string()));
        w.write_record(&head)?;
        for (k, t) in grid.times().enumerate() {
            let mut row = vec![fmt_num(t)];
            row.extend(series.iter().map(|s| fmt_num(panel_value(s.curve, p, k))));
            w.write_record(&row)?;
        }
        w.flush().map_err(io(&path))?;
        written.push(path);
    }
    let script = dir.join("plot_panels.py");
    std::fs::write(&script, PLOT_SCRIPT).map_err(io(&script))?;
    written.push(script);
    Ok(written)
}
