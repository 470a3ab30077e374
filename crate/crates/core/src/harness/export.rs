//! CSV and JSON export (schema v1; new columns are only ever appended).
//!
//! Floats in CSV files are written in scientific notation with 17
//! significant digits, so every value round-trips exactly.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::survival::SurvivalCurve;
use super::PathRow;
use crate::error::Result;
use crate::kendall::StoppingRecord;

/// A float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(csv::Writer::from_path(path)?)
}

/// `trial,outcome,tau,switches,final_R,final_A`
pub fn write_records_csv(path: &Path, records: &[StoppingRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["trial", "outcome", "tau", "switches", "final_R", "final_A"])?;
    for (i, r) in records.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.outcome.name().to_string(),
            fmt_f64(r.tau),
            r.phase_switch_count.to_string(),
            fmt_f64(r.final_r),
            fmt_f64(r.final_a),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `t,p_hat,ci`
pub fn write_survival_csv(path: &Path, curve: &SurvivalCurve) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "p_hat", "ci"])?;
    for ((t, p), c) in curve.grid.iter().zip(&curve.p_hat).zip(&curve.ci_half_width) {
        w.write_record([fmt_f64(*t), fmt_f64(*p), fmt_f64(*c)])?;
    }
    w.flush()?;
    Ok(())
}

/// `t,R,A,phase`
pub fn write_path_csv(path: &Path, rows: &[PathRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "R", "A", "phase"])?;
    for r in rows {
        w.write_record([fmt_f64(r.t), fmt_f64(r.r), fmt_f64(r.a), r.phase.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `t,R,A,W,phase,switch_count`
pub fn write_trace_csv(path: &Path, rows: &[PathRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "R", "A", "W", "phase", "switch_count"])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.t),
            fmt_f64(r.r),
            fmt_f64(r.a),
            fmt_f64(r.w),
            r.phase.to_string(),
            r.switch_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON `{ "config": …, "summary": … }`.
pub fn write_summary_json<C: Serialize, S: Serialize>(path: &Path, config: &C, summary: &S) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let doc = serde_json::json!({ "config": config, "summary": summary });
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, &doc)?;
    f.write_all(b"\n")?;
    Ok(())
}
