//! CSV export (and re-import) of trajectories and field grids.
//!
//! All numbers are written as `{:.11e}` (12 significant digits), which is
//! deterministic across runs: identical runs produce byte-identical files.
//! `min_clearance` is `inf` while nothing is registered.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Vector2;
use thiserror::Error;

use crate::error::CavfError;
use crate::fields::{Obstacle, TieBreak};
use crate::mixing::{mixed_cavf_with, MixConfig};
use crate::sim::{Trajectory, TrajectorySample};

/// Header line of trajectory CSV files.
pub const TRAJECTORY_HEADER: &str = "t,x,y,psi,u,min_clearance";
/// Header line of field-grid CSV files.
pub const FIELD_GRID_HEADER: &str = "x,y,hx,hy,lambda_min,w_snap";

/// Errors from CSV import/export.
#[derive(Debug, Error)]
pub enum ExportError {
    /// File-system failure.
    #[error("{0}")]
    Io(#[from] io::Error),
    /// Field evaluation failed while sampling a grid.
    #[error("{0}")]
    Field(#[from] CavfError),
    /// A CSV line did not parse.
    #[error("malformed trajectory CSV at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

fn fmt(x: f64) -> String {
    format!("{x:.11e}")
}

/// Writes a trajectory as CSV to an arbitrary writer.
pub fn write_trajectory(out: &mut impl Write, trajectory: &Trajectory) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for s in &trajectory.samples {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt(s.t),
            fmt(s.x),
            fmt(s.y),
            fmt(s.psi),
            fmt(s.u),
            fmt(s.min_clearance)
        )?;
    }
    Ok(())
}

/// Writes a trajectory as a CSV file.
pub fn export_trajectory(trajectory: &Trajectory, path: impl AsRef<Path>) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_trajectory(&mut out, trajectory)?;
    out.flush()
}

/// Reads a trajectory CSV written by [`export_trajectory`].
///
/// `psi_d` and `e_psi` re-attach the mission parameters (they are not stored
/// in the CSV) so the result can be fed to
/// [`check_collision`](crate::sim::check_collision). Registration sets are
/// not stored either; `active_obstacles` comes back empty.
pub fn import_trajectory(
    path: impl AsRef<Path>,
    psi_d: f64,
    e_psi: f64,
) -> Result<Trajectory, ExportError> {
    let reader = BufReader::new(File::open(path)?);
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if idx == 0 {
            if line.trim() != TRAJECTORY_HEADER {
                return Err(ExportError::Malformed {
                    line: 1,
                    reason: format!("expected header {TRAJECTORY_HEADER:?}, got {line:?}"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(ExportError::Malformed {
                line: idx + 1,
                reason: format!("expected 6 columns, got {}", fields.len()),
            });
        }
        let mut values = [0.0; 6];
        for (i, f) in fields.iter().enumerate() {
            values[i] = f.trim().parse::<f64>().map_err(|e| ExportError::Malformed {
                line: idx + 1,
                reason: format!("column {}: {e}", i + 1),
            })?;
        }
        samples.push(TrajectorySample {
            t: values[0],
            x: values[1],
            y: values[2],
            psi: values[3],
            u: values[4],
            min_clearance: values[5],
            active_obstacles: Vec::new(),
        });
    }
    Ok(Trajectory { samples, collision: None, psi_d, e_psi })
}

/// A rectangular sampling grid (inclusive endpoints, at least 2 points per
/// axis).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    /// Left edge.
    pub x0: f64,
    /// Right edge.
    pub x1: f64,
    /// Bottom edge.
    pub y0: f64,
    /// Top edge.
    pub y1: f64,
    /// Samples along x.
    pub nx: usize,
    /// Samples along y.
    pub ny: usize,
}

impl GridSpec {
    /// Checks the edges are ordered and the resolution is at least 2 per
    /// axis.
    pub fn validate(&self) -> Result<(), CavfError> {
        if !(self.x1 > self.x0 && self.y1 > self.y0) {
            return Err(CavfError::InvalidParameter {
                name: "bounds",
                reason: format!(
                    "grid edges must be ordered, got x: [{}, {}], y: [{}, {}]",
                    self.x0, self.x1, self.y0, self.y1
                ),
            });
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(CavfError::InvalidParameter {
                name: "resolution",
                reason: format!("need at least 2 samples per axis, got {}x{}", self.nx, self.ny),
            });
        }
        Ok(())
    }
}

/// Samples the blended field over a grid and writes it as CSV.
///
/// Rows are emitted in row-major order (y outer, x inner), `nx * ny` rows in
/// total. Points inside an obstacle get the sentinel row
/// `hx = hy = 0, lambda_min = -1, w_snap = -1`; points where the blend is
/// degenerate (opposing fields cancel) get `hx = hy = 0, lambda_min = -2,
/// w_snap = -1`. Elsewhere `lambda_min` is the blend's diagnostic lambda and
/// `w_snap` the snapped obstacle index (`-1` if the blend did not snap).
///
/// With no obstacles every row carries the free stream
/// `v [cos psi_d, sin psi_d]`.
pub fn export_field_grid(
    obstacles: &[Obstacle],
    v: f64,
    psi_d: f64,
    mix: &MixConfig,
    tie: TieBreak,
    grid: &GridSpec,
    path: impl AsRef<Path>,
) -> Result<(), ExportError> {
    grid.validate()?;
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{FIELD_GRID_HEADER}")?;
    let free = v * Vector2::new(psi_d.cos(), psi_d.sin());
    for iy in 0..grid.ny {
        let y = grid.y0 + (grid.y1 - grid.y0) * iy as f64 / (grid.ny - 1) as f64;
        for ix in 0..grid.nx {
            let x = grid.x0 + (grid.x1 - grid.x0) * ix as f64 / (grid.nx - 1) as f64;
            let p = Vector2::new(x, y);
            let inside = obstacles.iter().any(|o| (p - o.center).norm() < o.r_o());
            let (hx, hy, lambda_min, w_snap) = if inside {
                (0.0, 0.0, -1.0, -1.0)
            } else if obstacles.is_empty() {
                (free.x, free.y, 1.0, -1.0)
            } else {
                match mixed_cavf_with(p, obstacles, v, mix, tie) {
                    Ok(sample) => (
                        sample.field.velocity.x,
                        sample.field.velocity.y,
                        sample.field.lambda,
                        sample.weights.snapped_index.map_or(-1.0, |i| i as f64),
                    ),
                    Err(CavfError::DegenerateBlend { .. }) => (0.0, 0.0, -2.0, -1.0),
                    Err(e) => return Err(e.into()),
                }
            };
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt(x),
                fmt(y),
                fmt(hx),
                fmt(hy),
                fmt(lambda_min),
                fmt(w_snap)
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Trajectory;

    #[test]
    fn number_format_is_twelve_significant_digits() {
        assert_eq!(fmt(0.5), "5.00000000000e-1");
        assert_eq!(fmt(-1.0 / 3.0), "-3.33333333333e-1");
        assert_eq!(fmt(f64::INFINITY), "inf");
    }

    #[test]
    fn trajectory_round_trips_through_csv() {
        let trajectory = Trajectory {
            samples: vec![
                TrajectorySample {
                    t: 0.0,
                    x: 1.25,
                    y: -0.5,
                    psi: 0.1,
                    u: 0.0,
                    min_clearance: f64::INFINITY,
                    active_obstacles: vec![],
                },
                TrajectorySample {
                    t: 0.01,
                    x: 1.26,
                    y: -0.49,
                    psi: 0.11,
                    u: 0.5,
                    min_clearance: 2.5,
                    active_obstacles: vec![],
                },
            ],
            collision: None,
            psi_d: 0.0,
            e_psi: 0.01,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        export_trajectory(&trajectory, &path).unwrap();
        let back = import_trajectory(&path, 0.0, 0.01).unwrap();
        assert_eq!(back.samples.len(), 2);
        assert!(back.samples[0].min_clearance.is_infinite());
        // 12 significant digits are plenty for these values.
        assert!((back.samples[1].x - 1.26).abs() < 1e-11);
    }
}
