use super::run::{Command, RunReport};
use crate::error::Result;
use crate::laplace_core::write_w1_csv;
use crate::wave_engine::{write_norms_csv, write_trajectory_csv};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// Trajectories wider than this are exported as norms only.
const FULL_TRAJECTORY_MAX_N: usize = 8;

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let path = dir.join(name);
    Ok((path.clone(), BufWriter::new(File::create(path)?)))
}

/// Writes `growth.csv`, `scan.csv` and `amplitude_convergence.csv` when the
/// corresponding data exist.
pub fn emit_plot_data(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if let Some(series) = &report.plot.growth {
        let (path, out) = create(dir, "growth.csv")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "log_norm_cumulative"])?;
        for (t, v) in series {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        written.push(path);
    }
    if let Some(v) = report.results.verdict.as_ref().filter(|v| !v.embedded.is_empty()) {
        let (path, out) = create(dir, "scan.csv")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "limit_norm_fit_a", "decay_fit_b", "flagged"])?;
        for r in &v.embedded {
            w.write_record([r.k.to_string(), r.fit_a.to_string(), r.fit_b.to_string(), r.flagged.to_string()])?;
        }
        w.flush()?;
        written.push(path);
    }
    if let Some(v) = report.results.verdict.as_ref().filter(|v| v.amplitudes.iter().any(|a| !a.gaps.is_empty())) {
        let (path, out) = create(dir, "amplitude_convergence.csv")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "T", "gap"])?;
        for a in &v.amplitudes {
            for (t, g) in &a.gaps {
                w.write_record([a.k.to_string(), t.to_string(), g.to_string()])?;
            }
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `report.json`, `timings.json` and every artifact the report carries.
pub fn write_outputs(report: &RunReport) -> Result<Vec<PathBuf>> {
    let dir = report.out_dir.as_path();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = dir.join("report.json");
    std::fs::write(&path, report.to_json() + "\n")?;
    written.push(path);
    let path = dir.join("timings.json");
    std::fs::write(&path, report.timings_json() + "\n")?;
    written.push(path);

    if report.command == Command::Build {
        let op = crate::operator_lab::build_operator(&report.scenario.operator)?;
        let path = dir.join("operator.json");
        std::fs::write(&path, op.to_json() + "\n")?;
        written.push(path);
    }
    if let Some(traj) = &report.plot.trajectory {
        if traj.dim() <= FULL_TRAJECTORY_MAX_N {
            let (path, out) = create(dir, "trajectory.csv")?;
            write_trajectory_csv(traj, out)?;
            written.push(path);
        } else {
            let (path, out) = create(dir, "trajectory_norms.csv")?;
            write_norms_csv(traj, out)?;
            written.push(path);
        }
    }
    if let Some(d) = &report.results.decompose {
        let (path, out) = create(dir, "w1.csv")?;
        write_w1_csv(d, out)?;
        written.push(path);
    }
    if let Some(a) = &report.results.absorption {
        let path = dir.join("absorption.json");
        let body = serde_json::to_string_pretty(&serde_json::json!({ "schema": 1, "results": a }))
            .expect("absorption serializes");
        std::fs::write(&path, body + "\n")?;
        written.push(path);
    }
    written.extend(emit_plot_data(report, dir)?);
    Ok(written)
}
