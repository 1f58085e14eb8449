//! Deterministic artifact writers: JSON reports, CSV tables and
//! gnuplot-compatible mirrors.
//!
//! Every writer formats floats itself (17 significant digits, lossless
//! for f64) and iterates rows in the caller's order, so a rerun with
//! the same inputs produces byte-identical files.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::criteria::ConditionReport;
use crate::error::Result;
use crate::heat::{HeatTrajectory, SweepReport};
use crate::spectrum::{EigenReport, LimitEigenvalue};

/// 17-significant-digit scientific notation (lossless f64 round trip).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `value` as pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes a CSV table and a gnuplot-compatible `.dat` mirror (same
/// stem, whitespace-delimited, header as a `#` comment).
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    for row in rows {
        assert_eq!(
            row.len(),
            header.len(),
            "row width does not match header"
        );
    }
    let mut csv = fs::File::create(path)?;
    writeln!(csv, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(csv, "{}", cells.join(","))?;
    }

    let dat_path = path.with_extension("dat");
    let mut dat = fs::File::create(dat_path)?;
    writeln!(dat, "# {}", header.join(" "))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(dat, "{}", cells.join(" "))?;
    }
    Ok(())
}

/// Everything the `full` subcommand produces, in one JSON document.
#[derive(Debug, Serialize)]
pub struct FullReport {
    pub k: usize,
    pub p_sweep: Vec<f64>,
    pub r_sweep: Vec<f64>,
    /// (p, u(0), u_min, boundary derivative, nodal radii) per sweep p.
    pub stationary: Vec<StationarySummary>,
    /// C¹ distance of the rescaled profile to the bubble per sweep p.
    pub rescale: Vec<RescaleRow>,
    pub limit_eigenvalue: LimitEigenvalue,
    pub eigen: EigenReport,
    pub conditions: ConditionReport,
    pub sweep: Option<SweepReport>,
}

/// Scalar summary of one stationary solution.
#[derive(Debug, Serialize)]
pub struct StationarySummary {
    pub p: f64,
    pub k: usize,
    pub u_center: f64,
    pub u_min: f64,
    pub du_boundary: f64,
    pub residual_sup: f64,
    pub nodal_radii: Vec<f64>,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub energy: f64,
    pub p_energy: f64,
    pub from_cache: bool,
}

/// One row of the bubble-convergence table.
#[derive(Debug, Serialize)]
pub struct RescaleRow {
    pub p: f64,
    pub sup_value_gap: f64,
    pub sup_derivative_gap: f64,
}

/// Time-series artifact for one heat trajectory.
pub fn write_trajectory(dir: &Path, tag: &str, traj: &HeatTrajectory) -> Result<PathBuf> {
    let rows: Vec<Vec<f64>> = (0..traj.times.len())
        .map(|i| {
            vec![
                traj.times[i],
                traj.sup_norms[i],
                traj.energies[i],
                traj.deviation[i],
            ]
        })
        .collect();
    let path = dir.join(format!("heatflow_{tag}.csv"));
    write_table(&path, &["t", "sup_norm", "energy", "deviation"], &rows)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_are_byte_deterministic_and_mirrored() {
        let dir = std::env::temp_dir().join(format!(
            "blowup-lab-report-test-{}",
            std::process::id()
        ));
        let _ = fs::remove_dir_all(&dir);
        let path = dir.join("table.csv");
        let rows = vec![vec![1.0, 0.1], vec![2.0, -3.5e-12]];
        write_table(&path, &["a", "b"], &rows).unwrap();
        let first = fs::read(&path).unwrap();
        write_table(&path, &["a", "b"], &rows).unwrap();
        assert_eq!(first, fs::read(&path).unwrap());
        let csv = String::from_utf8(first).unwrap();
        assert!(csv.starts_with("a,b\n"));
        let dat = fs::read_to_string(dir.join("table.dat")).unwrap();
        assert!(dat.starts_with("# a b\n"));
        // every float round-trips exactly
        for line in csv.lines().skip(1) {
            for cell in line.split(',') {
                let x: f64 = cell.parse().unwrap();
                assert_eq!(fmt_f64(x), cell);
            }
        }
        fs::remove_dir_all(&dir).unwrap();
    }
}
