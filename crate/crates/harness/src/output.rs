//! CSV and JSON writers. Reals are printed with 17 significant digits.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use sldg_core::velocity::{MacroField, PhaseSpace};

use crate::config::RunConfig;
use crate::error::HarnessError;
use crate::experiments::{ApSeries, ConvergenceTable};
use crate::run::{RunResult, StepRecord};

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

pub fn write_snapshot(path: &Path, space: &PhaseSpace, m: &MacroField) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    writeln!(w, "x,rho,u1,u2,T")?;
    for (x, c) in space.node_coordinates().iter().zip(&m.values) {
        let u = c.velocity();
        writeln!(
            w,
            "{},{},{},{},{}",
            real(*x),
            real(c.rho),
            real(u[0]),
            real(u[1]),
            real(c.temperature())
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics(path: &Path, records: &[StepRecord]) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    writeln!(
        w,
        "step,t,dt,mass,momentum1,momentum2,energy,mass_drift,momentum_drift,energy_drift,min_f,ap_error,l2"
    )?;
    for r in records {
        let vals = [
            r.t,
            r.dt,
            r.totals.mass,
            r.totals.momentum[0],
            r.totals.momentum[1],
            r.totals.energy,
            r.mass_drift,
            r.momentum_drift,
            r.energy_drift,
            r.min_f,
            r.ap_error,
            r.l2,
        ];
        let cols: Vec<String> = vals.iter().map(|v| real(*v)).collect();
        writeln!(w, "{},{}", r.step, cols.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_convergence(path: &Path, table: &ConvergenceTable) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    writeln!(w, "n_x,e1,order1,e2,order2")?;
    let opt = |o: Option<f64>| o.map(real).unwrap_or_default();
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.n_x,
            real(r.e1),
            opt(r.order1),
            real(r.e2),
            opt(r.order2)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// One row per recorded time, one ap_error column per series.
pub fn write_ap_series(path: &Path, series: &[ApSeries]) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    let names: Vec<String> = series
        .iter()
        .map(|s| format!("{}_eps{:e}", s.scheme, s.epsilon))
        .collect();
    writeln!(w, "step,t,{}", names.join(","))?;
    let rows = series.iter().map(|s| s.times.len()).max().unwrap_or(0);
    for i in 0..rows {
        let t = series.iter().find_map(|s| s.times.get(i)).copied().unwrap_or(f64::NAN);
        let cols: Vec<String> = series
            .iter()
            .map(|s| s.ap_error.get(i).map(|v| real(*v)).unwrap_or_default())
            .collect();
        writeln!(w, "{i},{},{}", real(t), cols.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Snapshots, diagnostics.csv and summary.json of one run; returns the paths.
pub fn write_run(dir: &Path, cfg: &RunConfig, r: &RunResult) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for s in &r.snapshots {
        let p = dir.join(format!("snapshot_{:06}.csv", s.step));
        write_snapshot(&p, &r.space, &s.moments)?;
        written.push(p);
    }
    let p = dir.join("diagnostics.csv");
    write_diagnostics(&p, &r.records)?;
    written.push(p);
    let last = r.records.last().expect("initial record");
    let summary = json!({
        "config": cfg,
        "scheme": cfg.scheme.label(),
        "dt": r.dt,
        "t": r.t,
        "steps": r.steps,
        "completed": r.completed(),
        "failure": r.failure,
        "min_f": r.min_f(),
        "final": last,
    });
    let p = dir.join("summary.json");
    write_json(&p, &summary)?;
    written.push(p);
    Ok(written)
}
