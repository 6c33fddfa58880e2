//! Frozen-in campaigns over one or several resolutions, with fitted orders.

use std::path::Path;

use serde::Serialize;

use super::flowmap::{advect_flowmap_with, pullback_error_with, FlowMapOptions, PullbackError};
use super::history::VelocityHistory;
use super::residual::{residual_sweep, SnapshotResiduals};
use crate::exterior::KForm;
use crate::fields::{Interpolation, ScalarField, VectorField};
use crate::rsf::{component_vorticities, decomposition_plan, DecompPlan};
use crate::solver::{initial_state, run, SolverConfig};
use crate::{Error, Result};

/// Least-squares slope of `log2 e` against `log2 N`. Any exact zero puts the
/// metric below the rounding floor and no slope is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderFit {
    pub slope: Option<f64>,
    pub below_floor: bool,
}

impl OrderFit {
    /// Observed order `-slope`, or `None` below the floor.
    pub fn order(&self) -> Option<f64> {
        self.slope.map(|s| -s)
    }
}

pub fn fit_order(resolutions: &[usize], errors: &[f64]) -> OrderFit {
    assert_eq!(resolutions.len(), errors.len(), "one error per resolution");
    if errors.contains(&0.0) {
        return OrderFit {
            slope: None,
            below_floor: true,
        };
    }
    if errors.len() < 2 || errors.iter().any(|e| !e.is_finite()) {
        return OrderFit {
            slope: None,
            below_floor: false,
        };
    }
    let xs: Vec<f64> = resolutions.iter().map(|&n| (n as f64).log2()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    OrderFit {
        slope: Some(sxy / sxx),
        below_floor: false,
    }
}

fn nested(resolutions: &[usize]) -> bool {
    !resolutions.is_empty()
        && resolutions[0] > 0
        && resolutions
            .windows(2)
            .all(|w| w[1] > w[0] && w[1] % w[0] == 0)
}

/// At least three strictly increasing resolutions, each dividing the next.
pub fn check_nested(resolutions: &[usize]) -> Result<()> {
    if resolutions.len() >= 3 && nested(resolutions) {
        Ok(())
    } else {
        Err(Error::NonNested(resolutions.to_vec()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    /// Flow-map RK4 steps over the run are `N / substep_divisor`, at least 4.
    pub substep_divisor: usize,
    /// Particles per axis; the sample stride is `N / particles`.
    pub particles: usize,
    /// Scheme for both particle sampling and the pullback; `Nearest` is the
    /// first-order control.
    pub scheme: Interpolation,
    /// Velocity offset for the wrong-transport control, run at the finest
    /// resolution.
    pub negative_offset: Option<Vec<f64>>,
    pub min_order: f64,
    pub order_tolerance: f64,
    /// Bound on the absolute grid-L² pullback error at the finest resolution.
    pub max_abs_error: f64,
    pub min_control_ratio: f64,
    pub linearity_tol: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            substep_divisor: 4,
            particles: 32,
            scheme: Interpolation::Lagrange4,
            negative_offset: Some(vec![0.3, -0.2, 0.1]),
            min_order: 3.0,
            order_tolerance: 0.5,
            max_abs_error: 1e-4,
            min_control_ratio: 1e3,
            linearity_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentRecord {
    /// 1-based component index in the decomposition plan.
    pub component: usize,
    /// 1-based tuples carrying the component at `t0`.
    pub support: Vec<Vec<usize>>,
    /// One entry per resolution.
    pub pullback: Vec<PullbackError>,
    /// Only filled with three or more resolutions.
    pub order_l2: Option<OrderFit>,
    pub order_linf: Option<OrderFit>,
    /// Wrong-transport error at the finest resolution.
    pub control: Option<PullbackError>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionRecord {
    pub n: usize,
    pub snapshots: usize,
    pub snapshot_spacing: f64,
    pub residuals: Vec<SnapshotResiduals>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub plan: DecompPlan,
    pub resolutions: Vec<ResolutionRecord>,
    pub components: Vec<ComponentRecord>,
    pub criteria: Vec<Criterion>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// One row per component and resolution.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["component", "n", "linf", "l2", "linf_rel", "l2_rel"])?;
        for c in &self.components {
            for (r, e) in self.resolutions.iter().zip(&c.pullback) {
                w.write_record([
                    c.component.to_string(),
                    r.n.to_string(),
                    e.linf.to_string(),
                    e.l2.to_string(),
                    e.linf_rel.to_string(),
                    e.l2_rel.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }
}

struct Measured {
    record: ResolutionRecord,
    errors: Vec<PullbackError>,
    support: Vec<Vec<Vec<usize>>>,
    control: Option<Vec<PullbackError>>,
}

fn vorticities(u: &VectorField, plan: &DecompPlan) -> Result<Vec<KForm<ScalarField>>> {
    component_vorticities(u.components(), plan)
}

fn measure(
    history: &VelocityHistory,
    plan: &DecompPlan,
    options: &StudyOptions,
    control: bool,
) -> Result<Measured> {
    let grid = history.grid();
    let n = grid.dims()[0];
    let stride = (n / options.particles.max(1)).max(1);
    let substeps = (n / options.substep_divisor.max(1)).max(4);
    let (t0, t1) = (
        history.times()[0],
        *history.times().last().expect("non-empty"),
    );
    let flow = FlowMapOptions {
        substeps,
        sample_stride: stride,
        scheme: options.scheme,
        velocity_offset: None,
    };
    let start = vorticities(history.field(0), plan)?;
    let end = vorticities(history.field(history.len() - 1), plan)?;
    let support = start
        .iter()
        .map(|w| w.support().iter().map(|t| t.to_one_based()).collect())
        .collect();
    let errors_for = |flow: &FlowMapOptions| -> Result<Vec<PullbackError>> {
        let map = advect_flowmap_with(history, t0, t1, flow)?;
        end.iter()
            .zip(&start)
            .map(|(e, s)| pullback_error_with(e, &map, s, options.scheme))
            .collect()
    };
    let errors = errors_for(&flow)?;
    let control = match (&options.negative_offset, control) {
        (Some(off), true) => {
            let mut off = off.clone();
            off.resize(grid.dim(), 0.0);
            Some(errors_for(&FlowMapOptions {
                velocity_offset: Some(off),
                ..flow.clone()
            })?)
        }
        _ => None,
    };
    drop((start, end));
    let residuals = residual_sweep(history, |u| vorticities(u, plan))?;
    Ok(Measured {
        record: ResolutionRecord {
            n,
            snapshots: history.len(),
            snapshot_spacing: history.spacing(),
            residuals,
        },
        errors,
        support,
        control,
    })
}

/// Runs the campaign on histories supplied per resolution, dropping each
/// before the next is loaded.
pub fn study_histories(
    scenario: &str,
    resolutions: &[usize],
    mut load: impl FnMut(usize) -> Result<VelocityHistory>,
    options: &StudyOptions,
) -> Result<VerificationReport> {
    if !nested(resolutions) {
        return Err(Error::NonNested(resolutions.to_vec()));
    }
    let mut measured = Vec::new();
    let mut plan = None;
    for (k, &n) in resolutions.iter().enumerate() {
        let history = load(n)?;
        let p = decomposition_plan(history.grid().dim())?;
        let m = measure(&history, &p, options, k + 1 == resolutions.len())?;
        plan = Some(p);
        measured.push(m);
    }
    let plan = plan.expect("at least one resolution");
    let ns: Vec<usize> = measured.iter().map(|m| m.record.n).collect();
    let finest = measured.last().expect("at least one resolution");
    let components: Vec<ComponentRecord> = (0..plan.m)
        .map(|c| {
            let pullback: Vec<PullbackError> = measured.iter().map(|m| m.errors[c]).collect();
            let fit = |f: fn(&PullbackError) -> f64| {
                (ns.len() >= 3).then(|| fit_order(&ns, &pullback.iter().map(f).collect::<Vec<_>>()))
            };
            ComponentRecord {
                component: c + 1,
                support: finest.support[c].clone(),
                order_l2: fit(|e| e.l2_rel),
                order_linf: fit(|e| e.linf_rel),
                control: finest.control.as_ref().map(|v| v[c]),
                pullback,
            }
        })
        .collect();

    let mut criteria = Vec::new();
    let mut push = |name: String, value: f64, threshold: f64, passed: bool| {
        criteria.push(Criterion {
            name,
            value,
            threshold,
            passed,
        });
    };
    for c in &components {
        if let Some(fit) = c.order_l2 {
            let need = options.min_order - options.order_tolerance;
            match fit.order() {
                Some(order) => push(
                    format!("order_l2_component{}", c.component),
                    order,
                    need,
                    order >= need,
                ),
                // errors at the rounding floor are as converged as they get
                None => push(
                    format!("order_l2_component{}", c.component),
                    f64::INFINITY,
                    need,
                    fit.below_floor,
                ),
            }
        }
        let last = c.pullback.last().expect("one error per resolution");
        push(
            format!("abs_l2_component{}", c.component),
            last.l2,
            options.max_abs_error,
            last.l2 <= options.max_abs_error,
        );
        if let Some(ctrl) = c.control {
            let ratio = if last.l2_rel > 0.0 {
                ctrl.l2_rel / last.l2_rel
            } else {
                f64::INFINITY
            };
            push(
                format!("control_ratio_component{}", c.component),
                ratio,
                options.min_control_ratio,
                ratio >= options.min_control_ratio,
            );
        }
    }
    let linearity = measured
        .iter()
        .flat_map(|m| &m.record.residuals)
        .map(|s| s.linearity)
        .fold(0.0, f64::max);
    push(
        "linearity".into(),
        linearity,
        options.linearity_tol,
        linearity <= options.linearity_tol,
    );
    let passed = criteria.iter().all(|c| c.passed);
    Ok(VerificationReport {
        scenario: scenario.to_string(),
        plan,
        resolutions: measured.into_iter().map(|m| m.record).collect(),
        components,
        criteria,
        passed,
    })
}

/// Runs the solver in memory and keeps every snapshot's `d`-component
/// velocity.
pub fn simulate_history(config: &SolverConfig) -> Result<VelocityHistory> {
    let (initial, _) = initial_state(config)?;
    let mut times = Vec::new();
    let mut fields = Vec::new();
    run(config, initial, |_, state, _| {
        times.push(state.time());
        fields.push(state.velocity3());
        Ok(())
    })?;
    VelocityHistory::new(times, fields)
}

/// Reruns `config` with `dims = [N, N, N]` for each resolution.
pub fn convergence_study(
    config: &SolverConfig,
    resolutions: &[usize],
    options: &StudyOptions,
) -> Result<VerificationReport> {
    check_nested(resolutions)?;
    study_histories(
        &config.mode.to_string(),
        resolutions,
        |n| {
            simulate_history(&SolverConfig {
                dims: [n; 3],
                ..config.clone()
            })
        },
        options,
    )
}
