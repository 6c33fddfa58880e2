//! Centered finite differences with periodic wrap.

use super::{Grid, ScalarField, TensorField, VectorField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    Order2,
    #[default]
    Order4,
}

impl Scheme {
    fn half_width(self) -> usize {
        match self {
            Scheme::Order2 => 1,
            Scheme::Order4 => 2,
        }
    }
}

/// Applies `kernel(row, minus, plus)` along `axis`, where `minus[s-1]` and
/// `plus[s-1]` are the rows at offsets -s and +s.
fn along_axis(
    grid: &Grid,
    values: &[f64],
    axis: usize,
    half_width: usize,
    mut kernel: impl FnMut(&mut [f64], &[f64], &[&[f64]], &[&[f64]]),
) -> Vec<f64> {
    let n = grid.dims()[axis];
    let inner = grid.stride(axis);
    let outer = grid.len() / (n * inner);
    let mut out = vec![0.0; grid.len()];
    let mut minus: Vec<&[f64]> = Vec::with_capacity(half_width);
    let mut plus: Vec<&[f64]> = Vec::with_capacity(half_width);
    for o in 0..outer {
        let block = o * n * inner;
        let row = |i: usize| &values[block + i * inner..block + (i + 1) * inner];
        for i in 0..n {
            minus.clear();
            plus.clear();
            for s in 1..=half_width {
                minus.push(row((i + n - s) % n));
                plus.push(row((i + s) % n));
            }
            let start = block + i * inner;
            kernel(&mut out[start..start + inner], row(i), &minus, &plus);
        }
    }
    out
}

/// ∂f/∂x_axis by centered differences.
///
/// The differences are formed as antisymmetric pairs, so fields that do not
/// vary along `axis` differentiate to exactly zero.
pub fn partial_derivative(f: &ScalarField, axis: usize, scheme: Scheme) -> Result<ScalarField> {
    let grid = f.grid();
    grid.check_axis(axis)?;
    let width = 2 * scheme.half_width() + 1;
    if grid.dims()[axis] < width {
        return Err(Error::GridTooSmall {
            axis,
            dims: grid.dims()[axis],
            min: width,
        });
    }
    let h = grid.spacing(axis);
    let out = match scheme {
        Scheme::Order2 => {
            let c = 1.0 / (2.0 * h);
            along_axis(grid, f.values(), axis, 1, |out, _, m, p| {
                for j in 0..out.len() {
                    out[j] = c * (p[0][j] - m[0][j]);
                }
            })
        }
        Scheme::Order4 => {
            let c = 1.0 / (12.0 * h);
            along_axis(grid, f.values(), axis, 2, |out, _, m, p| {
                for j in 0..out.len() {
                    out[j] = c * (8.0 * (p[0][j] - m[0][j]) - (p[1][j] - m[1][j]));
                }
            })
        }
    };
    Ok(ScalarField::from_raw(grid.clone(), out))
}

/// ∂²f/∂x_axis², 5-point 4th-order stencil.
pub fn second_derivative(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    let grid = f.grid();
    grid.check_axis(axis)?;
    let h = grid.spacing(axis);
    let c = 1.0 / (12.0 * h * h);
    let out = along_axis(grid, f.values(), axis, 2, |out, mid, m, p| {
        for j in 0..out.len() {
            out[j] = c * (16.0 * (p[0][j] + m[0][j]) - (p[1][j] + m[1][j]) - 30.0 * mid[j]);
        }
    });
    Ok(ScalarField::from_raw(grid.clone(), out))
}

pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    let mut acc = second_derivative(f, 0)?.into_values();
    for axis in 1..f.grid().dim() {
        for (a, v) in acc.iter_mut().zip(second_derivative(f, axis)?.values()) {
            *a += v;
        }
    }
    Ok(ScalarField::from_raw(f.grid().clone(), acc))
}

/// Velocity gradient with entry `(r, c) = ∂u_c/∂x_r` (row = derivative
/// direction).
pub fn gradient_tensor(u: &VectorField) -> Result<TensorField> {
    let d = u.grid().dim();
    if u.ncomp() != d {
        return Err(Error::DimensionMismatch(format!(
            "gradient tensor needs {d} components, got {}",
            u.ncomp()
        )));
    }
    let mut entries = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            entries.push(partial_derivative(u.component(c), r, Scheme::Order4)?);
        }
    }
    TensorField::new(d, d, entries)
}

pub fn divergence(u: &VectorField) -> Result<ScalarField> {
    let d = u.grid().dim();
    if u.ncomp() != d {
        return Err(Error::DimensionMismatch(format!(
            "divergence needs {d} components, got {}",
            u.ncomp()
        )));
    }
    let mut acc = vec![0.0; u.grid().len()];
    for i in 0..d {
        let di = partial_derivative(u.component(i), i, Scheme::Order4)?;
        for (a, v) in acc.iter_mut().zip(di.values()) {
            *a += v;
        }
    }
    Ok(ScalarField::from_raw(u.grid().clone(), acc))
}
