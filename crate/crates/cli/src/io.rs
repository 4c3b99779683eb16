//! File ingestion (weight grids, activation vectors) and CSV export.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use mramsim_core::{CompareReport, MvmRun, SweepPoint};

/// Parses an ASCII weight grid: one row per line, characters `0`/`1`,
/// optional whitespace between them, row-major. Blank lines and lines
/// starting with `#` are skipped. All rows must have the same width.
pub fn parse_weights(text: &str) -> Result<Vec<Vec<bool>>> {
    let mut rows: Vec<Vec<bool>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for (colno, ch) in line.chars().filter(|c| !c.is_whitespace()).enumerate() {
            match ch {
                '0' => row.push(false),
                '1' => row.push(true),
                other => bail!(
                    "weights: invalid character {other:?} at row {}, column {} (line {}); \
                     expected 0 or 1",
                    rows.len() + 1,
                    colno + 1,
                    lineno + 1
                ),
            }
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                bail!(
                    "weights: row {} (line {}) has {} columns but row 1 has {}",
                    rows.len() + 1,
                    lineno + 1,
                    row.len(),
                    first.len()
                );
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("weights: file contains no rows");
    }
    Ok(rows)
}

/// Parses an activation vector: one integer in `0..=3` per line. Blank
/// lines and `#` comments are skipped.
pub fn parse_inputs(text: &str) -> Result<Vec<u8>> {
    let mut xs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let x: u8 = line.parse().with_context(|| {
            format!(
                "inputs: line {}: expected an integer in 0..=3, got {line:?}",
                lineno + 1
            )
        })?;
        if x > 3 {
            bail!("inputs: line {}: activation {x} out of range 0..=3", lineno + 1);
        }
        xs.push(x);
    }
    if xs.is_empty() {
        bail!("inputs: file contains no activations");
    }
    Ok(xs)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating directory {}", dir.display()))?;
        }
    }
    let file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::Writer::from_writer(file))
}

/// Writes one serializable record per row, header from the field names.
pub fn write_records_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the yield-sweep table (`fig7_yield.csv` schema: one row per
/// operating point, Monte-Carlo and closed-form yields side by side).
pub fn write_sweep_csv(path: &Path, points: &[SweepPoint]) -> Result<()> {
    write_records_csv(path, points)
}

/// One row of the linearity-curve export: long format, one row per
/// (mirror mode, pulse count) pair.
#[derive(Debug, Serialize)]
pub struct InlCsvRow {
    pub mode: String,
    pub count: u32,
    pub v_out_mv: f64,
    pub inl_lsb: f64,
    pub code: u8,
}

/// One row of the converter ramp export.
#[derive(Debug, Serialize)]
pub struct AdcCsvRow {
    pub v_in_mv: f64,
    pub code: u8,
    pub oracle: u8,
    pub boundary: bool,
    pub agree: bool,
}

/// Writes the bit-cell comparison table (`fig8e_compare.csv`): one row per
/// (junction contrast, cell arrangement), with the weight- and
/// activation-influence curves flattened into columns. The
/// conventional/latch-based mismatch ratios live in the JSON report.
pub fn write_compare_csv(path: &Path, report: &CompareReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<String> = vec![
        "tmr0".into(),
        "mode".into(),
        "i_on_ua".into(),
        "i_off_ua".into(),
        "off_leak_units".into(),
    ];
    let n_w = report.points.first().map_or(0, |p| p.w_curve_units.len());
    let n_x = report.points.first().map_or(0, |p| p.x_curve_units.len());
    header.extend((0..n_w).map(|w| format!("w_curve_{w}")));
    header.extend((0..n_x).map(|x| format!("x_curve_{x}")));
    header.push("mismatch_units".into());
    w.write_record(&header)?;
    for p in &report.points {
        let mut rec: Vec<String> = vec![
            p.tmr0.to_string(),
            p.mode.to_string(),
            p.i_on_ua.to_string(),
            p.i_off_ua.to_string(),
            p.off_leak_units.to_string(),
        ];
        rec.extend(p.w_curve_units.iter().map(f64::to_string));
        rec.extend(p.x_curve_units.iter().map(f64::to_string));
        rec.push(p.mismatch_units.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one accumulator transient per column as
/// `trace_col{NN}.csv` with columns `time_ps,v_out_mv,i_out_ua`.
/// Returns the written paths.
pub fn write_trace_csvs(dir: &Path, run: &MvmRun) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating directory {}", dir.display()))?;
    let mut paths = Vec::with_capacity(run.traces.len());
    for (col, trace) in run.traces.iter().enumerate() {
        let path = dir.join(format!("trace_col{col:02}.csv"));
        let mut w = csv_writer(&path)?;
        w.write_record(["time_ps", "v_out_mv", "i_out_ua"])?;
        for s in &trace.samples {
            w.write_record(&[
                s.t_ps.to_string(),
                s.v_out_mv.to_string(),
                s.i_out_ua.to_string(),
            ])?;
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}
