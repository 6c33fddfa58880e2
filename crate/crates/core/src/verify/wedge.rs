//! Invariance of wedge products of frozen components.

use serde::Serialize;

use super::history::VelocityHistory;
use super::residual::residual_form;
use crate::exterior::{wedge, KForm};
use crate::fields::ScalarField;
use crate::rsf::{component_vorticities, DecompPlan};
use crate::{Error, Result};

/// Norms are `max_x Σ_I |·|` so that `‖α∧β‖ ≤ ‖α‖‖β‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WedgeSnapshot {
    pub time: f64,
    /// `(∂t + L_u)(Ω_i∧Ω_j)` evaluated directly on the product.
    pub direct: f64,
    /// `R_i∧Ω_j + Ω_i∧R_j`.
    pub expansion: f64,
    /// `‖Ω_j‖‖R_i‖ + ‖Ω_i‖‖R_j‖`.
    pub bound: f64,
    pub factor_residuals: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WedgePair {
    /// 0-based component indices.
    pub components: (usize, usize),
    pub snapshots: Vec<WedgeSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WedgeReport {
    pub d: usize,
    /// Every product of two 2-forms vanishes identically when `d < 4`.
    pub trivial: bool,
    pub pairs: Vec<WedgePair>,
}

impl WedgeReport {
    pub fn within_bound(&self) -> bool {
        self.pairs
            .iter()
            .flat_map(|p| &p.snapshots)
            .all(|s| s.expansion <= s.bound * (1.0 + 1e-12) + f64::MIN_POSITIVE)
    }

    pub fn max_direct(&self) -> f64 {
        self.pairs
            .iter()
            .flat_map(|p| &p.snapshots)
            .map(|s| s.direct)
            .fold(0.0, f64::max)
    }

    /// Largest factor residual over all pairs and snapshots.
    pub fn max_factor(&self) -> f64 {
        self.pairs
            .iter()
            .flat_map(|p| &p.snapshots)
            .flat_map(|s| s.factor_residuals)
            .fold(0.0, f64::max)
    }
}

pub fn wedge_invariants(history: &VelocityHistory, plan: &DecompPlan) -> Result<WedgeReport> {
    let d = history.grid().dim();
    if plan.d != d {
        return Err(Error::DimensionMismatch(format!(
            "plan for d={} on a {d}-dimensional history",
            plan.d
        )));
    }
    if d < 4 {
        return Ok(WedgeReport {
            d,
            trivial: true,
            pairs: Vec::new(),
        });
    }
    let series: Vec<Vec<KForm<ScalarField>>> = history
        .fields()
        .iter()
        .map(|u| component_vorticities(u.components(), plan))
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for i in 0..plan.m {
        for j in i + 1..plan.m {
            let products: Vec<KForm<ScalarField>> = series
                .iter()
                .map(|w| wedge(&w[i], &w[j]))
                .collect::<Result<_>>()?;
            let mut snapshots = Vec::new();
            for t in 1..history.len() - 1 {
                let factor = |c: usize| {
                    residual_form(
                        history,
                        t,
                        &series[t - 1][c],
                        &series[t][c],
                        &series[t + 1][c],
                    )
                };
                let (ri, _) = factor(i)?;
                let (rj, _) = factor(j)?;
                let (rw, _) =
                    residual_form(history, t, &products[t - 1], &products[t], &products[t + 1])?;
                let (wi, wj) = (&series[t][i], &series[t][j]);
                let expansion = wedge(&ri, wj)?.add(&wedge(wi, &rj)?)?;
                let (nri, nrj) = (ri.pointwise_l1_max(), rj.pointwise_l1_max());
                snapshots.push(WedgeSnapshot {
                    time: history.times()[t],
                    direct: rw.pointwise_l1_max(),
                    expansion: expansion.pointwise_l1_max(),
                    bound: wj.pointwise_l1_max() * nri + wi.pointwise_l1_max() * nrj,
                    factor_residuals: [nri, nrj],
                });
            }
            pairs.push(WedgePair {
                components: (i, j),
                snapshots,
            });
        }
    }
    Ok(WedgeReport {
        d,
        trivial: false,
        pairs,
    })
}
