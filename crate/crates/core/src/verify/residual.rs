//! Residuals of `(∂t + L_u)Ω = 0` on snapshot series.

use serde::Serialize;

use super::history::VelocityHistory;
use crate::exterior::{lie_derivative_cartan, KForm};
use crate::fields::ScalarField;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualNorms {
    pub time: f64,
    pub linf: f64,
    pub l2: f64,
    /// Size of the two terms, `‖∂tΩ‖∞ + ‖L_uΩ‖∞`.
    pub scale: f64,
}

/// Residual form at interior snapshot `i` with a centered time difference.
pub fn residual_form(
    history: &VelocityHistory,
    i: usize,
    prev: &KForm<ScalarField>,
    cur: &KForm<ScalarField>,
    next: &KForm<ScalarField>,
) -> Result<(KForm<ScalarField>, f64)> {
    let dt = history.spacing();
    let dtw = next.sub(prev)?.scaled(0.5 / dt);
    let lie = lie_derivative_cartan(history.field(i).components(), cur)?;
    let scale = dtw.max_norm() + lie.max_norm();
    Ok((dtw.add(&lie)?, scale))
}

/// Residual norms at every interior snapshot of `series`, which must hold
/// one form per history snapshot.
pub fn residual_pde(
    history: &VelocityHistory,
    series: &[KForm<ScalarField>],
) -> Result<Vec<ResidualNorms>> {
    Ok(residual_series(history, series)?
        .into_iter()
        .map(|(time, r, scale)| ResidualNorms {
            time,
            linf: r.max_norm(),
            l2: r.l2_norm(),
            scale,
        })
        .collect())
}

fn residual_series(
    history: &VelocityHistory,
    series: &[KForm<ScalarField>],
) -> Result<Vec<(f64, KForm<ScalarField>, f64)>> {
    if series.len() != history.len() {
        return Err(Error::History(format!(
            "{} forms for {} snapshots",
            series.len(),
            history.len()
        )));
    }
    if series.iter().any(|w| w.grid() != history.grid()) {
        return Err(Error::GridMismatch);
    }
    (1..history.len() - 1)
        .map(|i| {
            let (r, scale) = residual_form(history, i, &series[i - 1], &series[i], &series[i + 1])?;
            Ok((history.times()[i], r, scale))
        })
        .collect()
}

/// `max_t ‖R(ΣΩ_i) − ΣR(Ω_i)‖∞ / scale(ΣΩ_i)` over interior snapshots,
/// where `components[c][t]` is component `c` at snapshot `t`.
pub fn linearity_discrepancy(
    history: &VelocityHistory,
    components: &[Vec<KForm<ScalarField>>],
) -> Result<Vec<f64>> {
    let first = components
        .first()
        .ok_or_else(|| Error::History("no components".into()))?;
    let mut total: Vec<KForm<ScalarField>> = first.clone();
    for comp in &components[1..] {
        if comp.len() != total.len() {
            return Err(Error::History("component series differ in length".into()));
        }
        for (t, w) in total.iter_mut().zip(comp) {
            *t = t.add(w)?;
        }
    }
    let whole = residual_series(history, &total)?;
    let parts = components
        .iter()
        .map(|c| residual_series(history, c))
        .collect::<Result<Vec<_>>>()?;
    whole
        .iter()
        .enumerate()
        .map(|(k, (_, r, scale))| {
            let mut sum = parts[0][k].1.clone();
            for p in &parts[1..] {
                sum = sum.add(&p[k].1)?;
            }
            let gap = r.sub(&sum)?.max_norm();
            Ok(if *scale > 0.0 { gap / scale } else { gap })
        })
        .collect()
}

/// Residuals of each component and the linearity gap at one interior
/// snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotResiduals {
    pub time: f64,
    pub components: Vec<ResidualNorms>,
    /// `‖R(ΣΩ_i) − ΣR(Ω_i)‖∞ / scale(ΣΩ_i)`.
    pub linearity: f64,
}

/// Like [`residual_pde`] plus [`linearity_discrepancy`], but derives the
/// component forms from each snapshot on the fly and keeps only three
/// snapshots' worth of forms alive.
pub fn residual_sweep(
    history: &VelocityHistory,
    mut forms: impl FnMut(&crate::fields::VectorField) -> Result<Vec<KForm<ScalarField>>>,
) -> Result<Vec<SnapshotResiduals>> {
    let mut window: std::collections::VecDeque<Vec<KForm<ScalarField>>> =
        std::collections::VecDeque::new();
    let mut out = Vec::new();
    for t in 0..history.len() {
        window.push_back(forms(history.field(t))?);
        if window.len() < 3 {
            continue;
        }
        let i = t - 1;
        let (prev, cur, next) = (&window[0], &window[1], &window[2]);
        if prev.len() != cur.len() || cur.len() != next.len() {
            return Err(Error::History(
                "component count changed between snapshots".into(),
            ));
        }
        let mut components = Vec::with_capacity(cur.len());
        let mut sum: Option<KForm<ScalarField>> = None;
        for c in 0..cur.len() {
            let (r, scale) = residual_form(history, i, &prev[c], &cur[c], &next[c])?;
            components.push(ResidualNorms {
                time: history.times()[i],
                linf: r.max_norm(),
                l2: r.l2_norm(),
                scale,
            });
            sum = Some(match sum {
                None => r,
                Some(s) => s.add(&r)?,
            });
        }
        let total = |w: &[KForm<ScalarField>]| -> Result<KForm<ScalarField>> {
            let mut acc = w[0].clone();
            for f in &w[1..] {
                acc = acc.add(f)?;
            }
            Ok(acc)
        };
        let linearity = match sum {
            Some(sum) => {
                let (whole, scale) =
                    residual_form(history, i, &total(prev)?, &total(cur)?, &total(next)?)?;
                let gap = whole.sub(&sum)?.max_norm();
                if scale > 0.0 {
                    gap / scale
                } else {
                    gap
                }
            }
            None => 0.0,
        };
        out.push(SnapshotResiduals {
            time: history.times()[i],
            components,
            linearity,
        });
        window.pop_front();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Grid, VectorField};

    #[test]
    fn static_form_without_flow_has_zero_residual() {
        let g = Grid::cube(2, 8).unwrap();
        let u = VectorField::zeros(&g, 2);
        let h = VelocityHistory::new(vec![0.0, 1.0, 2.0, 3.0], vec![u; 4]).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin() + x[1].cos()).unwrap();
        let w = KForm::<ScalarField>::from_terms(
            &g,
            2,
            [(crate::exterior::IndexTuple::new(vec![0, 1]).unwrap(), f)],
        )
        .unwrap();
        let r = residual_pde(&h, &vec![w.clone(); 4]).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|n| n.linf == 0.0));
        assert!(residual_pde(&h, &vec![w.clone(); 3]).is_err());
        let sweep = residual_sweep(&h, |_| Ok(vec![w.clone(), w.scaled(2.0)])).unwrap();
        assert_eq!(sweep.len(), 2);
        assert!(sweep
            .iter()
            .all(|s| s.linearity == 0.0 && s.components.len() == 2));
    }
}
