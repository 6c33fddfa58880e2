use serde::Serialize;

use crate::fields::{partial_derivative, Scheme, VectorField};
use crate::{Error, Result};

/// Gradient entries that vanish for a real Schur flow: `∂u_c/∂x_r` with
/// `block(r) > block(c)`, blocks `{1,2}, {3,4}, …`. Pairs are 1-based
/// `(c, r)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZeroPattern {
    pub d: usize,
    pub required_zero: Vec<(usize, usize)>,
}

/// Block of a 0-based axis.
pub fn block_of(axis: usize) -> usize {
    axis / 2
}

pub fn zero_pattern(d: usize) -> ZeroPattern {
    let mut required_zero = Vec::new();
    for r in 0..d {
        for c in 0..d {
            if block_of(r) > block_of(c) {
                required_zero.push((c + 1, r + 1));
            }
        }
    }
    ZeroPattern { d, required_zero }
}

/// Largest `max|∂u_c/∂x_r|` over the pattern's entries (order-4 stencil).
pub fn check_rsf(u: &VectorField, pattern: &ZeroPattern) -> Result<f64> {
    let d = u.grid().dim();
    if u.ncomp() != pattern.d || d != pattern.d {
        return Err(Error::DimensionMismatch(format!(
            "pattern for d={} against {} components in dimension {d}",
            pattern.d,
            u.ncomp()
        )));
    }
    let mut worst: f64 = 0.0;
    for &(c, r) in &pattern.required_zero {
        let g = partial_derivative(u.component(c - 1), r - 1, Scheme::Order4)?;
        worst = worst.max(g.max_abs());
    }
    Ok(worst)
}
