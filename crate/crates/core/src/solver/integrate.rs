//! RK4 stepping, diagnostics and the run loop.

use serde::{Deserialize, Serialize};

use super::config::SolverConfig;
use super::rhs::{pressure_residual, rhs};
use super::state::FlowState;
use crate::fields::{partial_derivative, Scheme};
use crate::rsf::{check_rsf, zero_pattern};
use crate::{Error, Result};

/// Abort threshold on `max |∂3 u3|`.
pub const GRADIENT_LIMIT: f64 = 20.0;

/// `cfl · min spacing / (max|u| + c)`.
pub fn cfl_dt(state: &FlowState, config: &SolverConfig) -> f64 {
    let umax = state.velocity3().max_norm();
    config.cfl * state.grid3().min_spacing() / (umax + config.c)
}

/// Classical four-stage Runge–Kutta step.
pub fn step_rk4(state: &FlowState, config: &SolverConfig, dt: f64) -> Result<FlowState> {
    let y0 = state.pack();
    let t0 = state.time();
    let stage = |k: &[f64], factor: f64, t: f64| -> Result<Vec<f64>> {
        let y: Vec<f64> = y0.iter().zip(k).map(|(y, k)| y + factor * k).collect();
        Ok(rhs(&state.with_packed(&y, t, state.steps()), config)?.pack())
    };
    let k1 = rhs(state, config)?.pack();
    let k2 = stage(&k1, 0.5 * dt, t0 + 0.5 * dt)?;
    let k3 = stage(&k2, 0.5 * dt, t0 + 0.5 * dt)?;
    let k4 = stage(&k3, dt, t0 + dt)?;
    let sixth = dt / 6.0;
    let y: Vec<f64> = (0..y0.len())
        .map(|i| y0[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
        .collect();
    let step = state.steps() + 1;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NanDetected { step });
    }
    Ok(state.with_packed(&y, t0 + dt, step))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub time: f64,
    /// `½∫ρ|u|²` over the 3D box.
    pub energy: f64,
    pub mass: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub umax: f64,
    pub rsf_dev: f64,
    pub pressure_residual: f64,
    /// `½∫ρ|u_h|²`; not written to the CSV.
    #[serde(skip)]
    pub horizontal_energy: f64,
}

/// Largest RSF zero-pattern violation of the assembled 3D velocity.
pub fn rsf_deviation(state: &FlowState) -> Result<f64> {
    check_rsf(&state.velocity3(), &zero_pattern(3))
}

pub fn diagnostics(state: &FlowState, config: &SolverConfig) -> Result<Diagnostics> {
    let grid3 = state.grid3();
    let dv = grid3.cell_volume();
    let n3 = grid3.dims()[2];
    let rho = state.rho().values();
    let rho_at = |p: usize| {
        if state.density_is_3d() {
            rho[p]
        } else {
            rho[p / n3]
        }
    };
    let (u1, u2) = (
        state.u_h().component(0).values(),
        state.u_h().component(1).values(),
    );
    let u3 = state.u3().values();
    let (mut energy, mut horizontal, mut mass, mut umax) = (0.0, 0.0, 0.0, 0.0f64);
    for (p, &w) in u3.iter().enumerate() {
        let r = rho_at(p);
        let h = u1[p / n3] * u1[p / n3] + u2[p / n3] * u2[p / n3];
        energy += 0.5 * r * (h + w * w) * dv;
        horizontal += 0.5 * r * h * dv;
        mass += r * dv;
        umax = umax.max((h + w * w).sqrt());
    }
    Ok(Diagnostics {
        time: state.time(),
        energy,
        mass,
        rho_min: rho.iter().copied().fold(f64::INFINITY, f64::min),
        rho_max: rho.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        umax,
        rsf_dev: rsf_deviation(state)?,
        pressure_residual: pressure_residual(state, config.c)?,
        horizontal_energy: horizontal,
    })
}

/// Step count and uniform step for a run: the initial CFL step sets the
/// count, rounded up to a multiple of the snapshot stride, and `t_end` is
/// split evenly.
pub fn step_plan(config: &SolverConfig, dt0: f64) -> (usize, f64) {
    if config.t_end == 0.0 {
        return (0, 0.0);
    }
    let stride = config.snapshot_stride;
    let raw = (config.t_end / dt0).ceil().max(1.0) as usize;
    let n = raw.div_ceil(stride) * stride;
    (n, config.t_end / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub dt: f64,
    pub snapshots: usize,
    pub diagnostics: Vec<Diagnostics>,
}

/// Integrates `initial` to `config.t_end`, calling `observer(index, state,
/// diagnostics)` at step 0 and every `snapshot_stride` steps.
pub fn run(
    config: &SolverConfig,
    initial: FlowState,
    mut observer: impl FnMut(usize, &FlowState, &Diagnostics) -> Result<()>,
) -> Result<RunSummary> {
    config.validate()?;
    let (n_steps, dt) = step_plan(config, cfl_dt(&initial, config));
    let mut state = initial;
    let mut all = Vec::new();
    let mut emit = |index: usize, s: &FlowState| -> Result<()> {
        let diag = diagnostics(s, config)?;
        observer(index, s, &diag)?;
        all.push(diag);
        Ok(())
    };
    emit(0, &state)?;
    for step in 1..=n_steps {
        state = step_rk4(&state, config, dt)?;
        // keep snapshot times on the uniform lattice
        state.set_time(step as f64 * dt);
        let steep = partial_derivative(state.u3(), 2, Scheme::Order4)?.max_abs();
        if steep > GRADIENT_LIMIT {
            return Err(Error::GradientBlowup {
                step,
                value: steep,
                limit: GRADIENT_LIMIT,
            });
        }
        if step % config.snapshot_stride == 0 {
            emit(step / config.snapshot_stride, &state)?;
        }
    }
    Ok(RunSummary {
        steps: n_steps,
        dt,
        snapshots: all.len(),
        diagnostics: all,
    })
}
