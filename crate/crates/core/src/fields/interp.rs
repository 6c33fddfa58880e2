//! Tensor-product interpolation on periodic grids.

use super::{Grid, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// 4-point Lagrange per axis: exact for per-axis cubics.
    #[default]
    Lagrange4,
    /// Value of the nearest node; first-order, kept as a degraded control.
    Nearest,
}

/// Precomputed flat indices and weights for evaluating any field on a grid
/// at one point. Reuse it when several fields share the point.
#[derive(Debug, Clone)]
pub struct Stencil {
    indices: Vec<usize>,
    weights: Vec<f64>,
}

fn lagrange_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Position in node units, snapped onto a node when it is within a few ulps
/// of one so that node coordinates reproduce node values exactly.
fn node_coordinate(x: f64, h: f64) -> f64 {
    let s = x / h;
    let r = s.round();
    if (s - r).abs() <= 8.0 * f64::EPSILON * r.abs().max(1.0) {
        r
    } else {
        s
    }
}

impl Stencil {
    pub fn new(grid: &Grid, point: &[f64], scheme: Interpolation) -> Self {
        debug_assert_eq!(point.len(), grid.dim());
        let d = grid.dim();
        let per_axis: Vec<(Vec<usize>, Vec<f64>)> = (0..d)
            .map(|a| {
                let n = grid.dims()[a] as i64;
                let s = node_coordinate(point[a], grid.spacing(a));
                match scheme {
                    Interpolation::Lagrange4 => {
                        let base = s.floor();
                        let w = lagrange_weights(s - base);
                        let base = base as i64;
                        let idx = (0..4)
                            .map(|o| (base + o - 1).rem_euclid(n) as usize)
                            .collect();
                        (idx, w.to_vec())
                    }
                    Interpolation::Nearest => {
                        (vec![(s.round() as i64).rem_euclid(n) as usize], vec![1.0])
                    }
                }
            })
            .collect();

        let count: usize = per_axis.iter().map(|(i, _)| i.len()).product();
        let mut indices = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        let mut odometer = vec![0usize; d];
        for _ in 0..count {
            let mut flat = 0;
            let mut w = 1.0;
            for a in 0..d {
                let (idx, wt) = &per_axis[a];
                flat = flat * grid.dims()[a] + idx[odometer[a]];
                w *= wt[odometer[a]];
            }
            indices.push(flat);
            weights.push(w);
            for a in (0..d).rev() {
                odometer[a] += 1;
                if odometer[a] < per_axis[a].0.len() {
                    break;
                }
                odometer[a] = 0;
            }
        }
        Stencil { indices, weights }
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.weights)
            .map(|(&i, &w)| w * values[i])
            .sum()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub(crate) fn parts(&self) -> (&[usize], &[f64]) {
        (&self.indices, &self.weights)
    }
}

/// Value of `f` at an arbitrary point (wrapped into the periodic box).
pub fn interpolate(f: &ScalarField, point: &[f64]) -> f64 {
    Stencil::new(f.grid(), point, Interpolation::Lagrange4).apply(f.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    #[test]
    fn nodes_are_reproduced_bit_exactly() {
        let g = Grid::new(vec![8, 12, 10], vec![TAU, 3.0, 1.7]).unwrap();
        let f = ScalarField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin() * x[2].exp()).unwrap();
        for p in 0..g.len() {
            assert_eq!(interpolate(&f, &g.node(p)), f.values()[p]);
        }
    }

    #[test]
    fn smooth_field_error_bound() {
        let g = Grid::cube(1, 64).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin()).unwrap();
        for i in 0..200 {
            let x = 0.0317 * i as f64 + 0.001;
            assert!((interpolate(&f, &[x]) - x.sin()).abs() <= 1e-5);
        }
    }

    #[test]
    fn exact_for_cubic_data_inside_stencil() {
        // the interpolant of samples of a cubic is that cubic
        let g = Grid::new(vec![16], vec![16.0]).unwrap();
        let cubic = |x: f64| 0.5 - x + 0.25 * x * x - 0.03 * x * x * x;
        let f = ScalarField::from_fn(&g, |x| cubic(x[0])).unwrap();
        for x in [3.2, 7.77, 10.01] {
            assert!((interpolate(&f, &[x]) - cubic(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_scheme_picks_closest_node() {
        let g = Grid::new(vec![8], vec![8.0]).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0]).unwrap();
        let s = Stencil::new(&g, &[2.4], Interpolation::Nearest);
        assert_eq!(s.apply(f.values()), 2.0);
        let s = Stencil::new(&g, &[7.6], Interpolation::Nearest);
        assert_eq!(s.apply(f.values()), 0.0);
    }

    proptest! {
        #[test]
        fn periodic_wrap(x in -3.0f64..3.0, y in -3.0f64..3.0, kx in -3i32..3, ky in -3i32..3) {
            let g = Grid::cube(2, 16).unwrap();
            let f = ScalarField::from_fn(&g, |p| p[0].sin() * (2.0 * p[1]).cos()).unwrap();
            let a = interpolate(&f, &[x, y]);
            let b = interpolate(&f, &[x + kx as f64 * TAU, y + ky as f64 * TAU]);
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
