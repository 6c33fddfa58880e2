//! Named campaigns: the manufactured kinematic run, an exact 4D history for
//! wedge invariants, and solver health checks.

use serde::Serialize;

use super::convergence::{convergence_study, fit_order, StudyOptions, VerificationReport};
use super::history::VelocityHistory;
use super::wedge::{wedge_invariants, WedgeReport};
use crate::fields::{Grid, ScalarField, VectorField};
use crate::rsf::decomposition_plan;
use crate::solver::{run, FlowState, Mode, SolverConfig};
use crate::Result;

/// Steady Taylor–Green `u_h` with a passively advected `u3`.
pub fn kinematic_config(n: usize) -> SolverConfig {
    SolverConfig {
        mode: Mode::KinematicTg,
        t_end: 1.0,
        snapshot_stride: 4,
        seed: 1,
        kmax: 2,
        amplitude: 0.05,
        dims: [n; 3],
        ..SolverConfig::default()
    }
}

pub fn kinematic_campaign(
    resolutions: &[usize],
    options: &StudyOptions,
) -> Result<VerificationReport> {
    convergence_study(&kinematic_config(resolutions[0]), resolutions, options)
}

/// Exact 4D velocity whose two plan components are both frozen:
/// `u1, u2` Taylor–Green, `u3 = aψ`, `u4 = b sin(x3 − aψt) + h(ψ)` with
/// `ψ = sin x1 sin x2` constant along the horizontal flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrozenRsf4 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for FrozenRsf4 {
    fn default() -> Self {
        FrozenRsf4 {
            a: 0.5,
            b: 0.5,
            c: 0.3,
        }
    }
}

impl FrozenRsf4 {
    pub fn velocity(&self, x: &[f64], t: f64) -> [f64; 4] {
        let psi = x[0].sin() * x[1].sin();
        [
            x[0].sin() * x[1].cos(),
            -x[0].cos() * x[1].sin(),
            self.a * psi,
            self.b * (x[2] - self.a * psi * t).sin() + self.c * psi.sin(),
        ]
    }

    /// `count` snapshots on an `n⁴` grid spaced by `spacing`, from `start`.
    pub fn history(
        &self,
        n: usize,
        start: f64,
        count: usize,
        spacing: f64,
    ) -> Result<VelocityHistory> {
        let grid = Grid::cube(4, n)?;
        let mut times = Vec::with_capacity(count);
        let mut fields = Vec::with_capacity(count);
        for i in 0..count {
            let t = start + i as f64 * spacing;
            let comps = (0..4)
                .map(|c| ScalarField::from_fn(&grid, |x| self.velocity(x, t)[c]))
                .collect::<Result<Vec<_>>>()?;
            times.push(t);
            fields.push(VectorField::new(comps)?);
        }
        VelocityHistory::new(times, fields)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WedgeCampaign {
    pub resolutions: Vec<usize>,
    pub reports: Vec<WedgeReport>,
    /// Largest direct wedge residual per resolution.
    pub direct: Vec<f64>,
    /// Largest factor residual per resolution.
    pub factor: Vec<f64>,
    pub direct_order: Option<f64>,
    pub factor_order: Option<f64>,
    pub within_bound: bool,
    pub passed: bool,
}

/// Wedge residuals of the exact 4D history at time `at`, from three
/// snapshots spaced by `spacing · h`; the direct residual must converge at
/// the factors' order within `tolerance`.
pub fn wedge_campaign(
    resolutions: &[usize],
    at: f64,
    spacing: f64,
    tolerance: f64,
) -> Result<WedgeCampaign> {
    let field = FrozenRsf4::default();
    let plan = decomposition_plan(4)?;
    let mut reports = Vec::new();
    for &n in resolutions {
        let dt = spacing * std::f64::consts::TAU / n as f64;
        let history = field.history(n, at - dt, 3, dt)?;
        reports.push(wedge_invariants(&history, &plan)?);
    }
    let direct: Vec<f64> = reports.iter().map(WedgeReport::max_direct).collect();
    let factor: Vec<f64> = reports.iter().map(WedgeReport::max_factor).collect();
    let direct_order = fit_order(resolutions, &direct).order();
    let factor_order = fit_order(resolutions, &factor).order();
    let within_bound = reports.iter().all(WedgeReport::within_bound);
    let orders_match = matches!((direct_order, factor_order), (Some(a), Some(b)) if (a - b).abs() <= tolerance && a > 0.0);
    Ok(WedgeCampaign {
        resolutions: resolutions.to_vec(),
        reports,
        direct,
        factor,
        direct_order,
        factor_order,
        within_bound,
        passed: within_bound && orders_match,
    })
}

/// `max_k max_{x1,x2} |f(x1, x2, x3_k) − f(x1, x2, x3_0)|` on a 3D field.
pub fn cross_slice_deviation(field: &ScalarField) -> f64 {
    let n3 = field.grid().dims()[2];
    field
        .values()
        .chunks(n3)
        .flat_map(|column| column.iter().map(move |v| (v - column[0]).abs()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcousticResult {
    pub measured: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub crossings: usize,
}

/// Standing sound wave from `u1 = ε sin x1`, `ρ = 1` in constrained mode.
/// The frequency comes from zero crossings of the projection of `u1` on
/// `sin x1`; the expected value is `c`.
pub fn acoustic_frequency(n: usize, c: f64, periods: f64) -> Result<AcousticResult> {
    let eps = 1e-4;
    let config = SolverConfig {
        mode: Mode::Constrained,
        c,
        nu: 0.0,
        t_end: periods * std::f64::consts::TAU / c,
        snapshot_stride: 1,
        dims: [n, n, 8],
        ..SolverConfig::default()
    };
    let grid3 = config.grid3()?;
    let grid2 = grid3.leading(2)?;
    let u1 = ScalarField::from_fn(&grid2, |x| eps * x[0].sin())?;
    let initial = FlowState::new(
        VectorField::new(vec![u1, ScalarField::zeros(&grid2)])?,
        ScalarField::zeros(&grid3),
        ScalarField::constant(&grid2, 1.0),
        0.0,
    )?;
    let basis = ScalarField::from_fn(&grid2, |x| x[0].sin())?;
    let norm: f64 = basis.values().iter().map(|v| v * v).sum();
    let mut samples: Vec<(f64, f64)> = Vec::new();
    run(&config, initial, |_, state, _| {
        let proj: f64 = state
            .u_h()
            .component(0)
            .values()
            .iter()
            .zip(basis.values())
            .map(|(u, b)| u * b)
            .sum();
        samples.push((state.time(), proj / norm));
        Ok(())
    })?;
    let crossings: Vec<f64> = samples
        .windows(2)
        .filter(|w| w[0].1 != 0.0 && w[0].1.signum() != w[1].1.signum())
        .map(|w| {
            let ((t0, a0), (t1, a1)) = (w[0], w[1]);
            t0 + (t1 - t0) * a0 / (a0 - a1)
        })
        .collect();
    let measured = if crossings.len() >= 2 {
        let half_period =
            (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
        std::f64::consts::PI / half_period
    } else {
        f64::NAN
    };
    Ok(AcousticResult {
        measured,
        expected: c,
        relative_error: (measured - c).abs() / c,
        crossings: crossings.len(),
    })
}

/// `|M(T) − M(0)| / (M(0) T)` for a seeded constrained run on `n × n × 8`.
pub fn mass_drift(n: usize, seed: u64, t_end: f64) -> Result<f64> {
    let config = SolverConfig {
        seed,
        t_end,
        dims: [n, n, 8],
        snapshot_stride: 1,
        ..SolverConfig::default()
    };
    let (initial, _) = crate::solver::initial_state(&config)?;
    let summary = run(&config, initial, |_, _, _| Ok(()))?;
    let first = summary
        .diagnostics
        .first()
        .expect("initial diagnostics")
        .mass;
    let worst = summary
        .diagnostics
        .iter()
        .map(|d| (d.mass - first).abs())
        .fold(0.0, f64::max);
    Ok(worst / (first * t_end))
}
