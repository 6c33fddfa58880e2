//! Periodic d-dimensional uniform grids and the fields sampled on them.
//!
//! Storage is a flat row-major array with axis 0 slowest. Every axis is
//! periodic, so index arithmetic always wraps.

mod analytic;
mod interp;
pub mod io;
mod stencil;

pub use analytic::{
    analytic_registry, band_limited_random, sparse_trig_random, AnalyticField, TrigField, TrigPoly,
};
pub use interp::{interpolate, Interpolation, Stencil};
pub use stencil::{
    divergence, gradient_tensor, laplacian, partial_derivative, second_derivative, Scheme,
};

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dims: Vec<usize>,
    length: Vec<f64>,
}

impl Grid {
    /// Smallest per-axis sample count accepted; the 5-point stencils need
    /// some headroom beyond their own width.
    pub const MIN_DIMS: usize = 8;

    pub fn new(dims: Vec<usize>, length: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        if dims.len() != length.len() {
            return Err(Error::InvalidGrid(format!(
                "{} dims but {} lengths",
                dims.len(),
                length.len()
            )));
        }
        for (axis, &n) in dims.iter().enumerate() {
            if n < Self::MIN_DIMS {
                return Err(Error::GridTooSmall {
                    axis,
                    dims: n,
                    min: Self::MIN_DIMS,
                });
            }
        }
        if let Some(l) = length.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "box length {l} must be positive"
            )));
        }
        Ok(Grid { dims, length })
    }

    /// A grid with the default 2π box on every axis.
    pub fn periodic(dims: &[usize]) -> Result<Self> {
        Self::new(dims.to_vec(), vec![TAU; dims.len()])
    }

    /// `d` axes of `n` samples each over a 2π box.
    pub fn cube(d: usize, n: usize) -> Result<Self> {
        Self::periodic(&vec![n; d])
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn length(&self) -> &[f64] {
        &self.length
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.length[axis] / self.dims[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn volume(&self) -> f64 {
        self.length.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    /// Distance in the flat array between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.dims[axis + 1..].iter().product()
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i % n)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            index[a] = flat % self.dims[a];
            flat /= self.dims[a];
        }
        index
    }

    /// Physical coordinates of a node.
    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| i as f64 * self.spacing(a))
            .collect()
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis < self.dim() {
            Ok(())
        } else {
            Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim(),
            })
        }
    }

    /// Every `stride`-th node on each axis. Nodes of the result are nodes of
    /// `self`.
    pub fn subsample(&self, stride: usize) -> Result<Grid> {
        if stride == 0 || self.dims.iter().any(|n| n % stride != 0) {
            return Err(Error::InvalidGrid(format!(
                "stride {stride} does not divide dims {:?}",
                self.dims
            )));
        }
        Grid::new(
            self.dims.iter().map(|n| n / stride).collect(),
            self.length.clone(),
        )
    }

    /// The grid spanned by the first `k` axes.
    pub fn leading(&self, k: usize) -> Result<Grid> {
        if k == 0 || k > self.dim() {
            return Err(Error::InvalidGrid(format!(
                "cannot take {k} leading axes of a {}-d grid",
                self.dim()
            )));
        }
        Grid::new(self.dims[..k].to_vec(), self.length[..k].to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(ScalarField { grid, values })
    }

    /// Unchecked constructor for internal kernels whose outputs are finite
    /// whenever their inputs are.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|p| f(&grid.node(p))).collect();
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Callers must keep values finite.
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[self.grid.flat_index(index)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_raw(self.grid.clone(), values))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid RMS, `sqrt(mean(v²))`.
    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    /// Sum in flat order (fixed reduction order keeps results reproducible).
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    /// Riemann-sum integral over the periodic box (spectrally accurate for
    /// smooth periodic data).
    pub fn integral(&self) -> f64 {
        self.sum() * self.grid.cell_volume()
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Restriction to the nodes of `self.grid().subsample(stride)`.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        let coarse = self.grid.subsample(stride)?;
        let values = (0..coarse.len())
            .map(|p| {
                let idx: Vec<usize> = coarse.multi_index(p).iter().map(|i| i * stride).collect();
                self.get(&idx)
            })
            .collect();
        Ok(Self::from_raw(coarse, values))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let grid = components
            .first()
            .map(|c| c.grid().clone())
            .ok_or_else(|| Error::DimensionMismatch("vector field needs a component".into()))?;
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(VectorField { grid, components })
    }

    pub fn zeros(grid: &Grid, ncomp: usize) -> Self {
        VectorField {
            grid: grid.clone(),
            components: vec![ScalarField::zeros(grid); ncomp],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    /// Point values of all components at a flat node index.
    pub fn at(&self, flat: usize) -> Vec<f64> {
        self.components.iter().map(|c| c.values[flat]).collect()
    }

    /// The first `k` components.
    pub fn truncated(&self, k: usize) -> Self {
        VectorField {
            grid: self.grid.clone(),
            components: self.components[..k.min(self.ncomp())].to_vec(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.grid.len())
            .map(|p| {
                self.components
                    .iter()
                    .map(|c| c.values[p].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Rank-2 field; entry `(r, c)` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    grid: Grid,
    rows: usize,
    cols: usize,
    entries: Vec<ScalarField>,
}

impl TensorField {
    pub fn new(rows: usize, cols: usize, entries: Vec<ScalarField>) -> Result<Self> {
        if entries.len() != rows * cols || entries.is_empty() {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        let grid = entries[0].grid().clone();
        if entries.iter().any(|e| *e.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(TensorField {
            grid,
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(grid: &Grid, rows: usize, cols: usize) -> Self {
        TensorField {
            grid: grid.clone(),
            rows,
            cols,
            entries: vec![ScalarField::zeros(grid); rows * cols],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, r: usize, c: usize) -> &ScalarField {
        &self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[ScalarField] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.entry(r, c).clone());
            }
        }
        TensorField {
            grid: self.grid.clone(),
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// Matrix at one node, row-major.
    pub fn matrix_at(&self, flat: usize) -> Vec<f64> {
        self.entries.iter().map(|e| e.values[flat]).collect()
    }

    pub fn trace(&self) -> Result<ScalarField> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut acc = self.entry(0, 0).values.clone();
        for i in 1..self.rows {
            for (a, v) in acc.iter_mut().zip(&self.entry(i, i).values) {
                *a += v;
            }
        }
        Ok(ScalarField::from_raw(self.grid.clone(), acc))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .map(ScalarField::max_abs)
            .fold(0.0, f64::max)
    }
}
