use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::integrate::{Trajectory, TrajectorySample};
use crate::state::BlochVector;

pub const CSV_HEADER: [&str; 8] = ["t", "x", "y", "z", "norm", "purity", "entropy", "trace_err"];

/// Shortest representation that parses back to the same bits; exponent
/// notation outside `[1e-5, 1e16)`.
fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// One row per sample in time order under the fixed header.
pub fn export_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(CSV_HEADER).map_err(csv_err(path))?;
    for s in &traj.samples {
        let row = [s.t, s.r.x, s.r.y, s.r.z, s.norm, s.purity, s.entropy, s.trace_error];
        w.write_record(row.map(format_f64)).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn import_trajectory(path: &Path) -> Result<Vec<TrajectorySample>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Validation(format!(
            "{}: unexpected CSV header {:?}",
            path.display(),
            header
        )));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let v: Vec<f64> = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Validation(format!("{}: bad number: {e}", path.display())))?;
        if v.len() != CSV_HEADER.len() {
            return Err(Error::Validation(format!("{}: short row", path.display())));
        }
        out.push(TrajectorySample {
            t: v[0],
            r: BlochVector::new(v[1], v[2], v[3]),
            norm: v[4],
            purity: v[5],
            entropy: v[6],
            trace_error: v[7],
        });
    }
    Ok(out)
}

/// Writes `traj_00000.csv`, `traj_00001.csv`, ... into `dir` (created if
/// missing) and returns the file names in seed order.
pub fn export_ensemble(trajs: &[Trajectory], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let width = trajs.len().saturating_sub(1).to_string().len().max(5);
    trajs
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let name = PathBuf::from(format!("traj_{i:0width$}.csv"));
            export_trajectory(t, &dir.join(&name))?;
            Ok(name)
        })
        .collect()
}
