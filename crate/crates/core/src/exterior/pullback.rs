//! Pullback of grid forms by a sampled map.

use super::{IndexTuple, KForm};
use crate::fields::{Grid, Interpolation, ScalarField, Stencil, TensorField, VectorField};
use crate::{Error, Result};

/// A map `Φ` sampled on the nodes of `grid`: image points (unwrapped
/// coordinates) and Jacobian `J(r, c) = ∂Φ_c/∂a_r`.
#[derive(Debug, Clone)]
pub struct DiscreteMap {
    images: VectorField,
    jacobian: TensorField,
}

/// Determinant by Gaussian elimination with partial pivoting.
pub(crate) fn determinant(mut m: Vec<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a * n + col].abs().total_cmp(&m[b * n + col].abs()))
            .unwrap_or(col);
        if m[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..n {
                m.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            if f != 0.0 {
                for c in col..n {
                    m[r * n + c] -= f * m[col * n + c];
                }
            }
        }
    }
    det
}

fn minor(j: &[f64], d: usize, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    let mut m = Vec::with_capacity(k * k);
    for &r in rows {
        for &c in cols {
            m.push(j[r * d + c]);
        }
    }
    determinant(m, k)
}

impl DiscreteMap {
    pub fn new(images: VectorField, jacobian: TensorField) -> Result<Self> {
        let grid = images.grid();
        let d = grid.dim();
        if images.ncomp() != d || jacobian.rows() != d || jacobian.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "map on a {d}-dimensional grid needs {d} images and a {d}x{d} Jacobian"
            )));
        }
        if jacobian.grid() != grid {
            return Err(Error::GridMismatch);
        }
        for node in 0..grid.len() {
            let det = determinant(jacobian.matrix_at(node), d);
            if det == 0.0 || !det.is_finite() {
                return Err(Error::SingularJacobian { node });
            }
        }
        Ok(DiscreteMap { images, jacobian })
    }

    pub fn identity(grid: &Grid) -> Self {
        let d = grid.dim();
        let images = (0..d)
            .map(|a| {
                ScalarField::from_raw(
                    grid.clone(),
                    (0..grid.len()).map(|p| grid.node(p)[a]).collect(),
                )
            })
            .collect();
        let jacobian = (0..d * d)
            .map(|e| ScalarField::constant(grid, if e / d == e % d { 1.0 } else { 0.0 }))
            .collect();
        DiscreteMap {
            images: VectorField::new(images).expect("same grid"),
            jacobian: TensorField::new(d, d, jacobian).expect("same grid"),
        }
    }

    /// Samples `map` and its Jacobian `jac` (row-major, `∂Φ_c/∂a_r` at `r*d+c`).
    pub fn from_fn(
        grid: &Grid,
        map: impl Fn(&[f64]) -> Vec<f64>,
        jac: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let d = grid.dim();
        let mut images = vec![Vec::with_capacity(grid.len()); d];
        let mut entries = vec![Vec::with_capacity(grid.len()); d * d];
        for p in 0..grid.len() {
            let a = grid.node(p);
            let x = map(&a);
            let j = jac(&a);
            if x.len() != d || j.len() != d * d {
                return Err(Error::DimensionMismatch(
                    "map or Jacobian has wrong length".into(),
                ));
            }
            for (dst, v) in images.iter_mut().zip(x) {
                dst.push(v);
            }
            for (dst, v) in entries.iter_mut().zip(j) {
                dst.push(v);
            }
        }
        let images = images
            .into_iter()
            .map(|v| ScalarField::new(grid.clone(), v))
            .collect::<Result<_>>()?;
        let entries = entries
            .into_iter()
            .map(|v| ScalarField::new(grid.clone(), v))
            .collect::<Result<_>>()?;
        Self::new(VectorField::new(images)?, TensorField::new(d, d, entries)?)
    }

    pub fn grid(&self) -> &Grid {
        self.images.grid()
    }

    pub fn images(&self) -> &VectorField {
        &self.images
    }

    pub fn jacobian(&self) -> &TensorField {
        &self.jacobian
    }

    pub fn determinant_at(&self, node: usize) -> f64 {
        determinant(self.jacobian.matrix_at(node), self.grid().dim())
    }
}

/// `Φ*ω` with 4-point Lagrange interpolation of `ω` at the image points.
pub fn pullback(map: &DiscreteMap, form: &KForm<ScalarField>) -> Result<KForm<ScalarField>> {
    pullback_with(map, form, Interpolation::Lagrange4)
}

/// `(Φ*ω)_I(a) = Σ_P ω_P(Φ(a)) det J[I, P]`. The result lives on the map's
/// grid, which need not be the grid of `ω`.
pub fn pullback_with(
    map: &DiscreteMap,
    form: &KForm<ScalarField>,
    scheme: Interpolation,
) -> Result<KForm<ScalarField>> {
    let d = form.dim();
    let grid = map.grid();
    if grid.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "map dimension {} vs form dimension {d}",
            grid.dim()
        )));
    }
    let k = form.degree();
    let targets = IndexTuple::all(d, k);
    let sources: Vec<(&IndexTuple, &ScalarField)> = form.iter().collect();
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; grid.len()]; targets.len()];
    let mut x = vec![0.0; d];
    for node in 0..grid.len() {
        for (a, xa) in x.iter_mut().enumerate() {
            *xa = map.images.component(a).values()[node];
        }
        let stencil = Stencil::new(form.grid(), &x, scheme);
        let j = map.jacobian.matrix_at(node);
        let values: Vec<f64> = sources
            .iter()
            .map(|(_, c)| stencil.apply(c.values()))
            .collect();
        for (ti, target) in targets.iter().enumerate() {
            let mut acc = 0.0;
            for ((source, _), v) in sources.iter().zip(&values) {
                acc += v * minor(&j, d, target.axes(), source.axes());
            }
            out[ti][node] = acc;
        }
    }
    let terms = targets
        .into_iter()
        .zip(out)
        .map(|(t, v)| Ok((t, ScalarField::new(grid.clone(), v)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(KForm::from_terms(grid, k, terms)?.pruned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{exterior_derivative, form_from_velocity};
    use crate::fields::TrigField;

    #[test]
    fn determinant_small_cases() {
        assert_eq!(determinant(vec![], 0), 1.0);
        assert_eq!(determinant(vec![2.0, 1.0, 1.0, 3.0], 2), 5.0);
        assert_eq!(determinant(vec![0.0, 1.0, 1.0, 0.0], 2), -1.0);
        assert_eq!(determinant(vec![1.0, 2.0, 2.0, 4.0], 2), 0.0);
    }

    #[test]
    fn identity_pullback_is_bit_exact() {
        let g = Grid::cube(3, 8).unwrap();
        let u: Vec<_> = TrigField::trig_random(1, 2, 3, 3, 3)
            .components()
            .iter()
            .map(|c| c.sample(&g).unwrap())
            .collect();
        let w = exterior_derivative(&form_from_velocity(&u).unwrap());
        let p = pullback(&DiscreteMap::identity(&g), &w).unwrap();
        for (t, c) in w.iter() {
            assert_eq!(p.get(t).unwrap().values(), c.values());
        }
    }

    #[test]
    fn shift_by_whole_period_is_bit_exact() {
        let g = Grid::cube(2, 8).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin() * x[1].cos()).unwrap();
        let w = KForm::from_terms(&g, 1, [(IndexTuple(vec![1]), f.clone())]).unwrap();
        let tau = std::f64::consts::TAU;
        let map =
            DiscreteMap::from_fn(&g, |a| vec![a[0] + tau, a[1]], |_| vec![1.0, 0.0, 0.0, 1.0])
                .unwrap();
        let p = pullback(&map, &w).unwrap();
        let diff = p
            .get(&IndexTuple(vec![1]))
            .unwrap()
            .zip_with(&f, |a, b| a - b)
            .unwrap();
        assert!(diff.max_abs() < 1e-14);
    }

    #[test]
    fn swap_map_changes_sign_of_area() {
        let g = Grid::cube(2, 8).unwrap();
        let area = KForm::<ScalarField>::basis(&g, &[0, 1]).unwrap();
        let map =
            DiscreteMap::from_fn(&g, |a| vec![a[1], a[0]], |_| vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let p = pullback(&map, &area).unwrap();
        assert!(p
            .get(&IndexTuple(vec![0, 1]))
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == -1.0));
    }

    #[test]
    fn singular_jacobian_rejected() {
        let g = Grid::cube(2, 8).unwrap();
        let r = DiscreteMap::from_fn(&g, |a| a.to_vec(), |_| vec![1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(r, Err(Error::SingularJacobian { node: 0 })));
    }
}
