//! On-disk results: one CSV per road and output time, plus a run summary.
//!
//! Layout under the output directory:
//!
//! ```text
//! <out>/<road_id>/t<time>.csv   x,rho_sampled,cell_avg
//! <out>/summary.json
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dg::RoadState;
use crate::network::{MassAudit, RunResult};
use crate::Result;

/// Samples per cell in the CSV files.
pub const SAMPLES_PER_CELL: usize = 4;

pub const CSV_HEADER: &str = "x,rho_sampled,cell_avg";

/// File name for an output time; `{}` formatting of `f64` is the shortest
/// string that round-trips, so `0.5` maps to `t0.5.csv`.
pub fn snapshot_file_name(time: f64) -> String {
    format!("t{time}.csv")
}

pub fn road_csv(state: &RoadState, samples_per_cell: usize) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (x, rho, avg) in state.sample_cells(samples_per_cell) {
        writeln!(out, "{x},{rho},{avg}").unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditSummary {
    #[serde(flatten)]
    pub audit: MassAudit,
    pub drift: f64,
    pub mismatch: f64,
    pub relative_mismatch: f64,
}

impl From<MassAudit> for AuditSummary {
    fn from(audit: MassAudit) -> Self {
        AuditSummary {
            audit,
            drift: audit.drift(),
            mismatch: audit.mismatch(),
            relative_mismatch: audit.relative_mismatch(),
        }
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub roads: Vec<String>,
    pub output_times: Vec<f64>,
    pub final_time: f64,
    pub steps: usize,
    pub mass_audit: AuditSummary,
    pub min_density: f64,
    pub max_density: f64,
    pub dt_history: Vec<f64>,
}

impl RunSummary {
    pub fn new(result: &RunResult) -> Self {
        RunSummary {
            roads: result.road_ids.clone(),
            output_times: result.snapshots.iter().map(|s| s.time).collect(),
            final_time: result.final_state.time,
            steps: result.final_state.steps,
            mass_audit: result.audit.into(),
            min_density: result.min_density,
            max_density: result.max_density,
            dt_history: result.dt_history.clone(),
        }
    }
}

/// Writes every snapshot and the summary; returns the paths written.
pub fn write_run(result: &RunResult, out: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (r, id) in result.road_ids.iter().enumerate() {
        let dir = out.join(id);
        fs::create_dir_all(&dir)?;
        for snap in &result.snapshots {
            let path = dir.join(snapshot_file_name(snap.time));
            fs::write(&path, road_csv(&snap.roads[r], SAMPLES_PER_CELL))?;
            written.push(path);
        }
    }
    fs::create_dir_all(out)?;
    let path = out.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&RunSummary::new(result))?)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::{project_initial, Mesh1D};

    #[test]
    fn file_names() {
        assert_eq!(snapshot_file_name(0.5), "t0.5.csv");
        assert_eq!(snapshot_file_name(10.0), "t10.csv");
        assert_eq!(snapshot_file_name(470.0), "t470.csv");
    }

    #[test]
    fn csv_rows() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 2).unwrap();
        let s = project_initial(mesh, 1, |x| x).unwrap();
        let csv = road_csv(&s, 2);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        let row: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert!((row[0] - 0.125).abs() < 1e-15);
        assert!((row[1] - 0.125).abs() < 1e-13);
        assert!((row[2] - 0.25).abs() < 1e-13);
    }
}
