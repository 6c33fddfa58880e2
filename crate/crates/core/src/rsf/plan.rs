use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exterior::{exterior_derivative, Coefficient, IndexTuple, KForm};
use crate::{Error, Result};

/// Pairing of axes into `M = ⌊(d+1)/2⌋` components. Pairs are 1-based; for
/// odd `d` the last pair is `(d, d+1)` where `d+1` is a padded axis with
/// constant velocity that is never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompPlan {
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub pairs: Vec<(usize, usize)>,
    pub padded: bool,
}

pub fn decomposition_plan(d: usize) -> Result<DecompPlan> {
    DecompPlan::with_order(&(1..=d).collect::<Vec<_>>())
}

impl DecompPlan {
    /// Plan over a permuted axis order: pairs `(order[0], order[1])`, ….
    /// `order` holds 1-based axes and must be a permutation of `1..=d`.
    pub fn with_order(order: &[usize]) -> Result<Self> {
        let d = order.len();
        if d < 3 {
            return Err(Error::DimensionTooSmall(d));
        }
        let mut seen = vec![false; d];
        for &a in order {
            if a == 0 || a > d || std::mem::replace(&mut seen[a - 1], true) {
                return Err(Error::InvalidTuple(format!(
                    "{order:?} is not a permutation of 1..={d}"
                )));
            }
        }
        let pairs: Vec<(usize, usize)> = order
            .chunks(2)
            .map(|c| {
                if c.len() == 2 {
                    (c[0], c[1])
                } else {
                    (c[0], d + 1)
                }
            })
            .collect();
        Ok(DecompPlan {
            d,
            m: pairs.len(),
            pairs,
            padded: d % 2 == 1,
        })
    }

    /// 0-based stored axes of component `i` (the padded axis is omitted).
    pub fn axes(&self, i: usize) -> Vec<usize> {
        let (a, b) = self.pairs[i];
        [a, b]
            .into_iter()
            .filter(|&x| x <= self.d)
            .map(|x| x - 1)
            .collect()
    }

    /// Component owning 0-based `axis`.
    pub fn component_of(&self, axis: usize) -> usize {
        self.pairs
            .iter()
            .position(|&(a, b)| a == axis + 1 || b == axis + 1)
            .expect("axis inside plan")
    }
}

impl fmt::Display for DecompPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.m)
            .map(|i| {
                let names: Vec<String> =
                    self.axes(i).iter().map(|a| format!("u{}", a + 1)).collect();
                format!("({})", names.join(","))
            })
            .collect();
        write!(f, "M={}: {}", self.m, parts.join("|"))
    }
}

fn check_plan<C: Coefficient>(u: &[C], plan: &DecompPlan) -> Result<C::Domain> {
    let first = u
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty velocity".into()))?;
    let domain = first.domain();
    let dim = C::domain_dim(&domain);
    if u.len() != plan.d || dim != plan.d {
        return Err(Error::DimensionMismatch(format!(
            "plan for d={} with {} components in dimension {dim}",
            plan.d,
            u.len()
        )));
    }
    if u.iter().any(|c| c.domain() != domain) {
        return Err(Error::GridMismatch);
    }
    Ok(domain)
}

/// `U_i = u_a dx_a + u_b dx_b` for each pair `(a, b)`.
pub fn component_velocity_forms<C: Coefficient>(
    u: &[C],
    plan: &DecompPlan,
) -> Result<Vec<KForm<C>>> {
    let domain = check_plan(u, plan)?;
    (0..plan.m)
        .map(|i| {
            let terms = plan
                .axes(i)
                .into_iter()
                .map(|a| (IndexTuple::new(vec![a]).expect("single axis"), u[a].clone()));
            KForm::from_terms(&domain, 1, terms)
        })
        .collect()
}

/// `Ω_i = dU_i`.
pub fn component_vorticities<C: Coefficient>(u: &[C], plan: &DecompPlan) -> Result<Vec<KForm<C>>> {
    Ok(component_velocity_forms(u, plan)?
        .iter()
        .map(exterior_derivative)
        .collect())
}
