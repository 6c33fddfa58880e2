//! Velocity snapshots on a uniform time lattice.

use std::path::Path;

use crate::fields::{io as field_io, Grid, VectorField};
use crate::solver::list_snapshots;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct VelocityHistory {
    times: Vec<f64>,
    fields: Vec<VectorField>,
}

/// Cubic Lagrange weights at `s` for nodes `0, 1, 2, 3`.
fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
        s * (s - 2.0) * (s - 3.0) / 2.0,
        -s * (s - 1.0) * (s - 3.0) / 2.0,
        s * (s - 1.0) * (s - 2.0) / 6.0,
    ]
}

impl VelocityHistory {
    /// Needs at least 3 snapshots, strictly increasing and uniformly spaced
    /// times, and `d` velocity components on one `d`-dimensional grid.
    pub fn new(times: Vec<f64>, fields: Vec<VectorField>) -> Result<Self> {
        if times.len() != fields.len() {
            return Err(Error::History(format!(
                "{} times for {} fields",
                times.len(),
                fields.len()
            )));
        }
        if times.len() < 3 {
            return Err(Error::History(format!(
                "need at least 3 snapshots, got {}",
                times.len()
            )));
        }
        let grid = fields[0].grid();
        if fields
            .iter()
            .any(|f| f.grid() != grid || f.ncomp() != grid.dim())
        {
            return Err(Error::History(
                "snapshots must share one grid and carry d components".into(),
            ));
        }
        let dt = times[1] - times[0];
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::History("times must increase".into()));
        }
        for (i, w) in times.windows(2).enumerate() {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(times[i].abs()) {
                return Err(Error::History(format!(
                    "non-uniform spacing at snapshot {}",
                    i + 1
                )));
            }
        }
        Ok(VelocityHistory { times, fields })
    }

    /// Reads `snap_*.rsff` from `dir`, keeping the first `d` components.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let paths = list_snapshots(dir)?;
        let mut times = Vec::with_capacity(paths.len());
        let mut fields = Vec::with_capacity(paths.len());
        for p in &paths {
            let (field, t) = field_io::read(p)?;
            let d = field.grid().dim();
            if field.ncomp() < d {
                return Err(Error::History(format!(
                    "{} has {} components, need {d}",
                    p.display(),
                    field.ncomp()
                )));
            }
            times.push(t);
            fields.push(field.truncated(d));
        }
        Self::new(times, fields)
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn field(&self, i: usize) -> &VectorField {
        &self.fields[i]
    }

    pub fn spacing(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Index of the snapshot at time `t`, if `t` is on the lattice.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.times[0]) / self.spacing();
        let i = x.round();
        ((x - i).abs() < 1e-6 && i >= 0.0 && (i as usize) < self.len()).then_some(i as usize)
    }

    /// First snapshot of the cubic stencil used on interval `[i, i+1]` and
    /// the weights at time `t`. Stencils are `i-1..=i+2`, shifted inward at
    /// the ends; with 3 snapshots the stencil is quadratic (weight 3 is 0).
    pub fn time_stencil(&self, interval: usize, t: f64) -> (usize, [f64; 4]) {
        let n = self.len();
        if n < 4 {
            let s = (t - self.times[0]) / self.spacing();
            let w = [
                0.5 * (s - 1.0) * (s - 2.0),
                -s * (s - 2.0),
                0.5 * s * (s - 1.0),
                0.0,
            ];
            return (0, w);
        }
        let start = interval.saturating_sub(1).min(n - 4);
        let s = (t - self.times[start]) / self.spacing();
        (start, cubic_weights(s))
    }
}
