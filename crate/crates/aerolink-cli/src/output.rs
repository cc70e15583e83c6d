//! File emitters: CSV (RFC-4180-style quoting), PGM heatmaps, JSON reports.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use aerolink_core::grid::{ConcentrationField, ConcentrationSeries};
use aerolink_core::receiver::RocPoint;

/// Quotes a CSV field when it contains a delimiter, quote or line break.
pub fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        let escaped = field.replace('"', "\"\"");
        format!("\"{escaped}\"")
    } else {
        field.to_string()
    }
}

/// Writes a field snapshot as one row per cell: `x_m,y_m,z_m,t_s,concentration_per_m3`.
pub fn write_field_csv(path: &Path, field: &ConcentrationField) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "x_m,y_m,z_m,t_s,concentration_per_m3")?;
    for (idx, v) in field.values.iter().enumerate() {
        let (x, y, z) = field.grid.center(idx);
        writeln!(w, "{x},{y},{z},{t},{v}", t = field.time)?;
    }
    w.flush()
}

/// Steady-state variant without the time column:
/// `x_m,y_m,z_m,concentration_per_m3`.
pub fn write_steady_field_csv(path: &Path, field: &ConcentrationField) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "x_m,y_m,z_m,concentration_per_m3")?;
    for (idx, v) in field.values.iter().enumerate() {
        let (x, y, z) = field.grid.center(idx);
        writeln!(w, "{x},{y},{z},{v}")?;
    }
    w.flush()
}

/// Writes a probe time series: `t_s,concentration_per_m3`.
pub fn write_series_csv(path: &Path, series: &ConcentrationSeries) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t_s,concentration_per_m3")?;
    for (t, v) in series.times.iter().zip(&series.values) {
        writeln!(w, "{t},{v}")?;
    }
    w.flush()
}

/// Writes an ROC sweep: `tau,p_fa,p_detect,p_md`.
pub fn write_roc_csv(path: &Path, points: &[RocPoint]) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "tau,p_fa,p_detect,p_md")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{}",
            p.tau,
            p.p_fa,
            p.p_detect,
            1.0 - p.p_detect
        )?;
    }
    w.flush()
}

/// Generic key/value report: `metric,value`.
pub fn write_report_csv(path: &Path, rows: &[(String, String)]) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "metric,value")?;
    for (k, v) in rows {
        writeln!(w, "{},{}", csv_quote(k), csv_quote(v))?;
    }
    w.flush()
}

/// Renders the z-slice `iz` of a field as an 8-bit binary PGM (P5), linearly
/// scaled to the snapshot maximum. Row 0 is the highest y (north up);
/// columns run with x.
pub fn write_pgm(path: &Path, field: &ConcentrationField, iz: usize) -> io::Result<()> {
    let g = &field.grid;
    let (nx, ny) = (g.x.n, g.y.n);
    let peak = field.values.iter().copied().fold(0.0f64, f64::max);
    let mut data = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        let iy = ny - 1 - row;
        for ix in 0..nx {
            let v = field.values[g.index(ix, iy, iz)];
            let level = if peak > 0.0 {
                (v / peak * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            data.push(level);
        }
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(w, "P5\n{nx} {ny}\n255\n")?;
    w.write_all(&data)?;
    w.flush()
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json(path: &Path, value: &serde_json::Value) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}
