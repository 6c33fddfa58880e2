//! Particle flow maps with Jacobians, and pullback errors.

use std::collections::BTreeMap;

use serde::Serialize;

use super::history::VelocityHistory;
use crate::exterior::{pullback_with, DiscreteMap, KForm};
use crate::fields::{
    gradient_tensor, Grid, Interpolation, ScalarField, Stencil, TensorField, VectorField,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowMapOptions {
    /// RK4 steps over `[t0, t1]`, spread evenly over snapshot intervals.
    pub substeps: usize,
    /// Particles start on every `sample_stride`-th node per axis.
    pub sample_stride: usize,
    pub scheme: Interpolation,
    /// Constant vector added to the velocity (but not its gradient); the
    /// wrong-transport negative control.
    pub velocity_offset: Option<Vec<f64>>,
}

impl Default for FlowMapOptions {
    fn default() -> Self {
        FlowMapOptions {
            substeps: 16,
            sample_stride: 1,
            scheme: Interpolation::Lagrange4,
            velocity_offset: None,
        }
    }
}

/// `Φ` from `t0` to `t1` on the particle grid.
#[derive(Debug, Clone)]
pub struct FlowMap {
    pub map: DiscreteMap,
    pub t0: f64,
    pub t1: f64,
}

/// Gradient fields for the snapshots of the current time stencil.
struct GradientWindow<'a> {
    history: &'a VelocityHistory,
    grads: BTreeMap<usize, TensorField>,
}

impl GradientWindow<'_> {
    fn ensure(&mut self, start: usize) -> Result<()> {
        self.grads.retain(|&k, _| k >= start);
        let end = (start + 4).min(self.history.len());
        for i in start..end {
            if !self.grads.contains_key(&i) {
                self.grads
                    .insert(i, gradient_tensor(self.history.field(i))?);
            }
        }
        Ok(())
    }
}

fn dot(values: &[f64], idx: &[usize], w: &[f64]) -> f64 {
    idx.iter().zip(w).map(|(&i, &w)| w * values[i]).sum()
}

/// Velocity and gradient (row-major `∂_r u_c`) at `x` from a time stencil.
fn sample(
    window: &GradientWindow,
    grid: &Grid,
    scheme: Interpolation,
    start: usize,
    weights: &[f64; 4],
    x: &[f64],
    u: &mut [f64],
    g: &mut [f64],
) {
    let d = grid.dim();
    u.fill(0.0);
    g.fill(0.0);
    let stencil = Stencil::new(grid, x, scheme);
    let (idx, w) = stencil.parts();
    for (j, &wt) in weights.iter().enumerate() {
        if wt == 0.0 {
            continue;
        }
        let field = window.history.field(start + j);
        for (c, uc) in u.iter_mut().enumerate() {
            *uc += wt * dot(field.component(c).values(), idx, w);
        }
        let grad = &window.grads[&(start + j)];
        for (e, ge) in g.iter_mut().enumerate().take(d * d) {
            *ge += wt * dot(grad.entry(e / d, e % d).values(), idx, w);
        }
    }
}

pub fn advect_flowmap(
    history: &VelocityHistory,
    t0: f64,
    t1: f64,
    substeps: usize,
) -> Result<FlowMap> {
    advect_flowmap_with(
        history,
        t0,
        t1,
        &FlowMapOptions {
            substeps,
            ..FlowMapOptions::default()
        },
    )
}

/// Integrates `dx/dt = u(x, t)` and `dJ/dt = J·G(x, t)` with RK4 from `J = I`
/// for one particle per sample node. `t0 ≤ t1` must be snapshot times.
pub fn advect_flowmap_with(
    history: &VelocityHistory,
    t0: f64,
    t1: f64,
    options: &FlowMapOptions,
) -> Result<FlowMap> {
    let i0 = history
        .index_of(t0)
        .ok_or_else(|| Error::History(format!("t0 = {t0} is not a snapshot time")))?;
    let i1 = history
        .index_of(t1)
        .ok_or_else(|| Error::History(format!("t1 = {t1} is not a snapshot time")))?;
    if i1 < i0 {
        return Err(Error::History("flow maps run forward in time".into()));
    }
    let grid = history.grid().clone();
    let d = grid.dim();
    if let Some(off) = &options.velocity_offset {
        if off.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "velocity offset has {} entries, need {d}",
                off.len()
            )));
        }
    }
    let sample_grid = grid.subsample(options.sample_stride)?;
    let np = sample_grid.len();
    let mut pos: Vec<f64> = (0..np).flat_map(|p| sample_grid.node(p)).collect();
    let mut jac: Vec<f64> = (0..np)
        .flat_map(|_| (0..d * d).map(move |e| if e / d == e % d { 1.0 } else { 0.0 }))
        .collect();

    let intervals = i1 - i0;
    let per_interval = if intervals == 0 {
        0
    } else {
        options.substeps.div_ceil(intervals).max(1)
    };
    let mut window = GradientWindow {
        history,
        grads: BTreeMap::new(),
    };
    let dd = d * d;
    let (mut u, mut g) = (vec![0.0; d], vec![0.0; dd]);
    let mut kx = vec![[0.0; 4]; d];
    let mut kj = vec![[0.0; 4]; dd];
    let (mut x, mut j) = (vec![0.0; d], vec![0.0; dd]);

    for interval in i0..i1 {
        let h = history.spacing() / per_interval as f64;
        for s in 0..per_interval {
            let t = history.times()[interval] + s as f64 * h;
            let stages = [
                (t, 0.0),
                (t + 0.5 * h, 0.5 * h),
                (t + 0.5 * h, 0.5 * h),
                (t + h, h),
            ];
            let stencils: Vec<(usize, [f64; 4])> = stages
                .iter()
                .map(|&(ts, _)| history.time_stencil(interval, ts))
                .collect();
            window.ensure(stencils[0].0)?;
            for p in 0..np {
                let px = &mut pos[p * d..(p + 1) * d];
                let pj = &mut jac[p * dd..(p + 1) * dd];
                for (k, &(_, factor)) in stages.iter().enumerate() {
                    for a in 0..d {
                        x[a] = px[a] + if k == 0 { 0.0 } else { factor * kx[a][k - 1] };
                    }
                    for e in 0..dd {
                        j[e] = pj[e] + if k == 0 { 0.0 } else { factor * kj[e][k - 1] };
                    }
                    let (start, w) = stencils[k];
                    sample(
                        &window,
                        &grid,
                        options.scheme,
                        start,
                        &w,
                        &x,
                        &mut u,
                        &mut g,
                    );
                    if let Some(off) = &options.velocity_offset {
                        u.iter_mut().zip(off).for_each(|(a, b)| *a += b);
                    }
                    for a in 0..d {
                        kx[a][k] = u[a];
                    }
                    for r in 0..d {
                        for c in 0..d {
                            kj[r * d + c][k] = (0..d).map(|m| j[r * d + m] * g[m * d + c]).sum();
                        }
                    }
                }
                for a in 0..d {
                    let k = &kx[a];
                    px[a] += h / 6.0 * (k[0] + 2.0 * (k[1] + k[2]) + k[3]);
                }
                for e in 0..dd {
                    let k = &kj[e];
                    pj[e] += h / 6.0 * (k[0] + 2.0 * (k[1] + k[2]) + k[3]);
                }
            }
        }
    }

    if pos.iter().chain(&jac).any(|v| !v.is_finite()) {
        return Err(Error::History("flow map became non-finite".into()));
    }
    let images = (0..d)
        .map(|a| {
            ScalarField::new(
                sample_grid.clone(),
                (0..np).map(|p| pos[p * d + a]).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let entries = (0..dd)
        .map(|e| {
            ScalarField::new(
                sample_grid.clone(),
                (0..np).map(|p| jac[p * dd + e]).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let jacobian = TensorField::new(d, d, entries)?;
    for node in 0..np {
        let det = crate::exterior::determinant(jacobian.matrix_at(node), d);
        if det <= 0.0 {
            return Err(Error::FoldedMap { node, det });
        }
    }
    Ok(FlowMap {
        map: DiscreteMap::new(VectorField::new(images)?, jacobian)?,
        t0,
        t1,
    })
}

/// `Φ*Ω(t1) − Ω(t0)` in sup and grid-L² norms, absolute and divided by the
/// same norm of `Ω(t0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PullbackError {
    pub linf: f64,
    pub l2: f64,
    pub linf_rel: f64,
    pub l2_rel: f64,
}

fn relative(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err / scale
    } else if err == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn pullback_error(
    omega_t1: &KForm<ScalarField>,
    map: &FlowMap,
    omega_t0: &KForm<ScalarField>,
) -> Result<PullbackError> {
    pullback_error_with(omega_t1, map, omega_t0, Interpolation::Lagrange4)
}

pub fn pullback_error_with(
    omega_t1: &KForm<ScalarField>,
    map: &FlowMap,
    omega_t0: &KForm<ScalarField>,
    scheme: Interpolation,
) -> Result<PullbackError> {
    if omega_t1.degree() != omega_t0.degree() {
        return Err(Error::DegreeMismatch(format!(
            "{} vs {}",
            omega_t1.degree(),
            omega_t0.degree()
        )));
    }
    let target = map.map.grid();
    let reference = if omega_t0.grid() == target {
        omega_t0.clone()
    } else {
        let stride = omega_t0.grid().dims()[0] / target.dims()[0].max(1);
        let sub = omega_t0.subsample(stride.max(1))?;
        if sub.grid() != target {
            return Err(Error::GridMismatch);
        }
        sub
    };
    let pulled = pullback_with(&map.map, omega_t1, scheme)?;
    let diff = pulled.sub(&reference)?;
    let (linf, l2) = (diff.max_norm(), diff.l2_norm());
    Ok(PullbackError {
        linf,
        l2,
        linf_rel: relative(linf, reference.max_norm()),
        l2_rel: relative(l2, reference.l2_norm()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{exterior_derivative, form_from_velocity};
    use crate::fields::TrigField;

    fn history_of(
        g: &Grid,
        n: usize,
        dt: f64,
        u: impl Fn(&[f64], f64) -> Vec<f64>,
    ) -> VelocityHistory {
        let d = g.dim();
        let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let fields = times
            .iter()
            .map(|&t| {
                let comps = (0..d)
                    .map(|c| ScalarField::from_fn(g, |x| u(x, t)[c]).unwrap())
                    .collect();
                VectorField::new(comps).unwrap()
            })
            .collect();
        VelocityHistory::new(times, fields).unwrap()
    }

    #[test]
    fn constant_velocity_translates_exactly() {
        let g = Grid::cube(2, 8).unwrap();
        let h = history_of(&g, 5, 0.25, |_, _| vec![0.3, -0.2]);
        let fm = advect_flowmap(&h, 0.0, 1.0, 8).unwrap();
        for p in 0..g.len() {
            let a = g.node(p);
            assert!((fm.map.images().component(0).values()[p] - (a[0] + 0.3)).abs() < 1e-14);
            assert!((fm.map.images().component(1).values()[p] - (a[1] - 0.2)).abs() < 1e-14);
        }
        assert_eq!(fm.map.jacobian().entry(0, 0).max_abs(), 1.0);
        assert_eq!(fm.map.jacobian().entry(0, 1).max_abs(), 0.0);
    }

    #[test]
    fn same_time_gives_identity_and_zero_error() {
        let g = Grid::cube(2, 16).unwrap();
        let tg = TrigField::taylor_green_2d();
        let h = history_of(&g, 3, 0.1, |x, _| {
            tg.components().iter().map(|c| c.eval(x)).collect()
        });
        let fm = advect_flowmap(&h, 0.1, 0.1, 4).unwrap();
        let w = exterior_derivative(&form_from_velocity(h.field(1).components()).unwrap());
        let e = pullback_error(&w, &fm, &w).unwrap();
        assert_eq!((e.linf, e.l2), (0.0, 0.0));
    }

    #[test]
    fn steady_vortex_is_frozen_and_offset_is_not() {
        let tg = TrigField::taylor_green_2d();
        let mut errs = Vec::new();
        for n in [16, 32] {
            let g = Grid::cube(2, n).unwrap();
            let h = history_of(&g, 5, 0.125, |x, _| {
                tg.components().iter().map(|c| c.eval(x)).collect()
            });
            let w = exterior_derivative(&form_from_velocity(h.field(0).components()).unwrap());
            let fm = advect_flowmap(&h, 0.0, 0.5, n / 2).unwrap();
            errs.push(pullback_error(&w, &fm, &w).unwrap().l2_rel);
            if n == 32 {
                let opts = FlowMapOptions {
                    substeps: 16,
                    velocity_offset: Some(vec![0.5, 0.5]),
                    ..FlowMapOptions::default()
                };
                let bad = advect_flowmap_with(&h, 0.0, 0.5, &opts).unwrap();
                let neg = pullback_error(&w, &bad, &w).unwrap().l2_rel;
                assert!(neg > 1e3 * errs[1], "negative {neg} vs {}", errs[1]);
            }
        }
        assert!(errs[1] < 1e-4 && errs[0] / errs[1] > 8.0, "{errs:?}");
    }

    #[test]
    fn substep_refinement_converges() {
        let g = Grid::cube(2, 16).unwrap();
        let tg = TrigField::taylor_green_2d();
        let h = history_of(&g, 3, 0.5, |x, t| {
            let s = 1.0 + 0.3 * t;
            tg.components().iter().map(|c| s * c.eval(x)).collect()
        });
        let end = |m| {
            advect_flowmap(&h, 0.0, 1.0, m)
                .unwrap()
                .map
                .images()
                .component(0)
                .clone()
        };
        let (a, b, c) = (end(2), end(4), end(8));
        let d1 = a.zip_with(&b, |x, y| x - y).unwrap().max_abs();
        let d2 = b.zip_with(&c, |x, y| x - y).unwrap().max_abs();
        assert!(d2 <= d1 / 8.0, "{d1:e} {d2:e}");
    }
}
