//! Tendencies of the barotropic RSF system.

use super::config::{Mode, SolverConfig};
use super::state::{broadcast, check_density, x3_mean, FlowState};
use crate::fields::{laplacian, partial_derivative, ScalarField, Scheme, VectorField};
use crate::{Error, Result};

/// Time derivatives, laid out like the state.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendencies {
    pub u_h: VectorField,
    pub u3: ScalarField,
    pub rho: ScalarField,
}

impl Tendencies {
    pub(crate) fn pack(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for c in self.u_h.components() {
            v.extend_from_slice(c.values());
        }
        v.extend_from_slice(self.u3.values());
        v.extend_from_slice(self.rho.values());
        v
    }
}

fn d(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    partial_derivative(f, axis, Scheme::Order4)
}

fn product(a: &ScalarField, b: &ScalarField) -> ScalarField {
    a.zip_with(b, |x, y| x * y).expect("same grid")
}

/// `-(u1 ∂1 f + u2 ∂2 f)` with `u1, u2` horizontal and `f` on either grid.
fn horizontal_advection(state: &FlowState, f: &ScalarField) -> Result<Vec<f64>> {
    let (f1, f2) = (d(f, 0)?, d(f, 1)?);
    let (u1, u2) = (
        state.u_h().component(0).values(),
        state.u_h().component(1).values(),
    );
    let repeat = if f.grid().dim() == 3 {
        f.grid().dims()[2]
    } else {
        1
    };
    Ok(f1
        .values()
        .iter()
        .zip(f2.values())
        .enumerate()
        .map(|(p, (a, b))| {
            let h = p / repeat;
            -(u1[h] * a + u2[h] * b)
        })
        .collect())
}

fn add_viscous(out: &mut [f64], f: &ScalarField, nu: f64) -> Result<()> {
    if nu > 0.0 {
        for (o, l) in out.iter_mut().zip(laplacian(f)?.values()) {
            *o += nu * l;
        }
    }
    Ok(())
}

/// `∂t u3` shared by all modes, without the pressure term.
fn vertical_momentum(state: &FlowState, nu: f64) -> Result<Vec<f64>> {
    let u3 = state.u3();
    let mut out = horizontal_advection(state, u3)?;
    let d3 = d(u3, 2)?;
    for ((o, u), g) in out.iter_mut().zip(u3.values()).zip(d3.values()) {
        *o -= u * g;
    }
    add_viscous(&mut out, u3, nu)?;
    Ok(out)
}

/// `∂t u_a = -u_h·∇_h u_a - gradient_a + ν∇²_h u_a`.
fn horizontal_momentum(
    state: &FlowState,
    gradient: [&ScalarField; 2],
    nu: f64,
) -> Result<VectorField> {
    let mut comps = Vec::with_capacity(2);
    for (a, g) in gradient.into_iter().enumerate() {
        let ua = state.u_h().component(a);
        let mut out = horizontal_advection(state, ua)?;
        for (o, p) in out.iter_mut().zip(g.values()) {
            *o -= p;
        }
        add_viscous(&mut out, ua, nu)?;
        comps.push(ScalarField::from_raw(ua.grid().clone(), out));
    }
    VectorField::new(comps)
}

/// `c² ln ρ` on the density's grid.
pub fn pressure_function(state: &FlowState, c: f64) -> ScalarField {
    let c2 = c * c;
    state.rho().map(|r| c2 * r.ln())
}

/// `max |∂_aΠ − ⟨∂_aΠ⟩_{x3}|` over both horizontal axes; zero unless the
/// density is 3D.
pub fn pressure_residual(state: &FlowState, c: f64) -> Result<f64> {
    if !state.density_is_3d() {
        return Ok(0.0);
    }
    let pi = pressure_function(state, c);
    let n3 = state.grid3().dims()[2];
    let mut worst: f64 = 0.0;
    for a in 0..2 {
        let g = d(&pi, a)?;
        let mean = x3_mean(&g, state.grid2());
        for (p, v) in g.values().iter().enumerate() {
            worst = worst.max((v - mean.values()[p / n3]).abs());
        }
    }
    Ok(worst)
}

pub fn rhs(state: &FlowState, config: &SolverConfig) -> Result<Tendencies> {
    check_density(state.rho(), state.time())?;
    let grid2 = state.grid2();
    let grid3 = state.grid3();
    match config.mode {
        Mode::KinematicTg => Ok(Tendencies {
            u_h: VectorField::zeros(grid2, 2),
            u3: ScalarField::from_raw(grid3.clone(), vertical_momentum(state, 0.0)?),
            rho: ScalarField::zeros(state.rho().grid()),
        }),
        Mode::Constrained => {
            if state.density_is_3d() {
                return Err(Error::Config("constrained mode needs a 2D density".into()));
            }
            let pi = pressure_function(state, config.c);
            let (g1, g2) = (d(&pi, 0)?, d(&pi, 1)?);
            let u_h = horizontal_momentum(state, [&g1, &g2], config.nu)?;
            let u3 = ScalarField::from_raw(grid3.clone(), vertical_momentum(state, config.nu)?);
            let rho = state.rho();
            let f1 = d(&product(rho, state.u_h().component(0)), 0)?;
            let f2 = d(&product(rho, state.u_h().component(1)), 1)?;
            let drho = f1.zip_with(&f2, |a, b| -(a + b))?;
            Ok(Tendencies { u_h, u3, rho: drho })
        }
        Mode::Free => {
            if !state.density_is_3d() {
                return Err(Error::Config("free mode needs a 3D density".into()));
            }
            let pi = pressure_function(state, config.c);
            let g1 = x3_mean(&d(&pi, 0)?, grid2);
            let g2 = x3_mean(&d(&pi, 1)?, grid2);
            let u_h = horizontal_momentum(state, [&g1, &g2], config.nu)?;
            let mut du3 = vertical_momentum(state, config.nu)?;
            for (o, p) in du3.iter_mut().zip(d(&pi, 2)?.values()) {
                *o -= p;
            }
            let rho = state.rho();
            let u1 = broadcast(state.u_h().component(0), grid3);
            let u2 = broadcast(state.u_h().component(1), grid3);
            let f1 = d(&product(rho, &u1), 0)?;
            let f2 = d(&product(rho, &u2), 1)?;
            let f3 = d(&product(rho, state.u3()), 2)?;
            let drho: Vec<f64> = (0..grid3.len())
                .map(|p| -(f1.values()[p] + f2.values()[p] + f3.values()[p]))
                .collect();
            Ok(Tendencies {
                u_h,
                u3: ScalarField::from_raw(grid3.clone(), du3),
                rho: ScalarField::from_raw(grid3.clone(), drho),
            })
        }
    }
}
