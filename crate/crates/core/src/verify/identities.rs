//! Exterior-calculus identities on trigonometric polynomials, where every
//! derivative is exact and discrepancies are pure rounding.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exterior::{
    exterior_derivative, form_from_velocity, lie_derivative_cartan, lie_derivative_components,
    wedge, IndexTuple, KForm,
};
use crate::fields::{sparse_trig_random, TrigField, TrigPoly};
use crate::{Error, Result};

const KMAX: i32 = 2;
const MODES: usize = 3;

type Form = KForm<TrigPoly>;

/// `max_I ‖a_I − b_I‖₁ / max(1, ‖a‖, ‖b‖)` with `‖·‖` the largest
/// coefficient bound; the `1` keeps exact-zero identities absolute.
pub fn form_gap(a: &Form, b: &Form) -> Result<f64> {
    let diff = a.sub(b)?;
    let scale = 1f64.max(a.max_norm()).max(b.max_norm());
    Ok((diff.max_norm() / scale).abs())
}

fn axes_mask(d: usize, k: usize) -> Vec<bool> {
    (0..d).map(|a| a < k).collect()
}

fn velocity(seed: u64, d: usize) -> Vec<TrigPoly> {
    TrigField::trig_random(seed, KMAX, d, d, MODES)
        .components()
        .to_vec()
}

fn one_form(seed: u64, d: usize) -> Result<Form> {
    form_from_velocity(&velocity(seed, d))
}

/// A few random tuples with random coefficients.
fn two_form(seed: u64, d: usize) -> Result<Form> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tuples = IndexTuple::all(d, 2);
    tuples.shuffle(&mut rng);
    tuples.truncate(4);
    tuples.sort();
    let terms = tuples.into_iter().enumerate().map(|(i, t)| {
        (
            t,
            sparse_trig_random(
                seed.wrapping_mul(31).wrapping_add(i as u64),
                KMAX,
                &vec![true; d],
                MODES,
            ),
        )
    });
    KForm::from_terms(&d, 2, terms)
}

fn scalar(seed: u64, d: usize) -> Result<Form> {
    KForm::from_terms(
        &d,
        0,
        [(
            IndexTuple::empty(),
            sparse_trig_random(seed, KMAX, &vec![true; d], MODES),
        )],
    )
}

/// Builds the extension setting in `d` dimensions: `u` whose first `k`
/// components depend on `x_1..x_k` only (the rest arbitrary) and a form on
/// axes `≤ k` independent of the others. With `k ≥ 2` the form is the
/// vorticity of the first `k` components, otherwise `f(x_1) dx_1`.
fn extension_setting(d: usize, k: usize, seed: u64) -> Result<(Vec<TrigPoly>, Form)> {
    if !(3..=8).contains(&d) || k == 0 || k >= d {
        return Err(Error::DimensionMismatch(format!(
            "extension check needs 3 ≤ d ≤ 8 and 1 ≤ k < d, got d={d}, k={k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::RngCore;
    let mut next = || rng.next_u64();
    let low = axes_mask(d, k);
    let all = vec![true; d];
    let u: Vec<TrigPoly> = (0..d)
        .map(|c| sparse_trig_random(next(), KMAX, if c < k { &low } else { &all }, MODES))
        .collect();
    let omega = if k >= 2 {
        let v: Vec<TrigPoly> = (0..k)
            .map(|_| sparse_trig_random(next(), KMAX, &low, MODES))
            .collect();
        exterior_derivative(&form_from_velocity(&v)?)
    } else {
        KForm::from_terms(
            &d,
            1,
            [(
                IndexTuple::new(vec![0])?,
                sparse_trig_random(next(), KMAX, &low, MODES),
            )],
        )?
    };
    Ok((u, omega))
}

/// `‖L_{u(d)}ω − L_{u(k)}ω‖` where `u(k)` keeps the first `k` components.
pub fn extension_check(d: usize, k: usize, seed: u64) -> Result<f64> {
    let (u, omega) = extension_setting(d, k, seed)?;
    form_gap(
        &lie_derivative_cartan(&u, &omega)?,
        &lie_derivative_cartan(&u[..k], &omega)?,
    )
}

/// The same discrepancy after giving `ω` a dependence on `x_{k+1}`; the
/// hypothesis is violated and the result is O(1).
pub fn extension_violation(d: usize, k: usize, seed: u64) -> Result<f64> {
    let (u, omega) = extension_setting(d, k, seed)?;
    let tuple = omega.tuples().next().cloned().expect("non-empty form");
    let mut kvec = vec![0; d];
    kvec[k] = 1;
    let bump = KForm::from_terms(
        &d,
        omega.degree(),
        [(tuple, TrigPoly::sin_mode(&kvec, 1.0))],
    )?;
    let omega = omega.add(&bump)?;
    form_gap(
        &lie_derivative_cartan(&u, &omega)?,
        &lie_derivative_cartan(&u[..k], &omega)?,
    )
}

/// Padding: appending an axis with constant velocity leaves
/// `L_u ω` unchanged.
pub fn padding_check(d: usize, seed: u64) -> Result<f64> {
    let u = velocity(seed, d);
    let omega = two_form(seed + 7, d)?;
    let ext = |p: &TrigPoly| p.extended(d + 1);
    let mut u_ext: Vec<TrigPoly> = u.iter().map(ext).collect();
    u_ext.push(TrigPoly::constant(d + 1, 0.7));
    let omega_ext = omega.map_coefficients(&(d + 1), ext);
    let lhs = lie_derivative_cartan(&u_ext, &omega_ext)?;
    let rhs = lie_derivative_cartan(&u, &omega)?.map_coefficients(&(d + 1), ext);
    form_gap(&lhs, &rhs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityOptions {
    pub dims: Vec<usize>,
    pub seeds: u64,
    pub tol: f64,
    /// Adds the extension-hypothesis violation as a checked identity; the
    /// suite must then fail.
    pub inject_violation: bool,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        IdentityOptions {
            dims: (3..=8).collect(),
            seeds: 20,
            tol: 1e-12,
            inject_violation: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRecord {
    pub identity: String,
    pub d: usize,
    pub seed: u64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub records: Vec<IdentityRecord>,
    /// Largest discrepancy per identity.
    pub worst: BTreeMap<String, f64>,
    pub tol: f64,
    pub passed: bool,
}

fn per_seed(d: usize, seed: u64, inject: bool) -> Result<Vec<(&'static str, f64)>> {
    let base = seed * 1000 + d as u64;
    let u = velocity(base, d);
    let f = scalar(base + 1, d)?;
    let a1 = one_form(base + 2, d)?;
    let b1 = one_form(base + 3, d)?;
    let a2 = two_form(base + 4, d)?;
    let zero = |deg| KForm::<TrigPoly>::zero(&d, deg);
    let mut out = Vec::new();

    let mut dd: f64 = 0.0;
    for w in [&f, &a1, &a2] {
        let ddw = exterior_derivative(&exterior_derivative(w));
        dd = dd.max(form_gap(&ddw, &zero(ddw.degree()))?);
    }
    out.push(("d_squared", dd));

    let mut cartan: f64 = 0.0;
    for w in [&f, &a1, &a2] {
        cartan = cartan.max(form_gap(
            &lie_derivative_cartan(&u, w)?,
            &lie_derivative_components(&u, w)?,
        )?);
    }
    out.push(("cartan_vs_components", cartan));

    let mut commute: f64 = 0.0;
    for w in [&f, &a1, &a2] {
        let lhs = exterior_derivative(&lie_derivative_cartan(&u, w)?);
        let rhs = lie_derivative_components(&u, &exterior_derivative(w))?;
        commute = commute.max(form_gap(&lhs, &rhs)?);
    }
    out.push(("d_lie_commute", commute));

    let mut leibniz: f64 = 0.0;
    for (a, b) in [(&a1, &b1), (&a2, &b1)] {
        let lhs = lie_derivative_cartan(&u, &wedge(a, b)?)?;
        let rhs = wedge(&lie_derivative_cartan(&u, a)?, b)?
            .add(&wedge(a, &lie_derivative_cartan(&u, b)?)?)?;
        leibniz = leibniz.max(form_gap(&lhs, &rhs)?);
    }
    out.push(("leibniz", leibniz));

    let mut extension: f64 = 0.0;
    for k in 1..d {
        extension = extension.max(extension_check(d, k, base + 10 + k as u64)?);
    }
    out.push(("trivial_extension", extension));
    out.push(("padding", padding_check(d, base + 5)?));
    if inject {
        out.push((
            "extension_violation",
            extension_violation(d, d - 1, base + 6)?,
        ));
    }
    Ok(out)
}

pub fn identity_suite(options: &IdentityOptions) -> Result<IdentityReport> {
    let mut records = Vec::new();
    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    for &d in &options.dims {
        for seed in 0..options.seeds {
            for (name, discrepancy) in per_seed(d, seed, options.inject_violation)? {
                let w = worst.entry(name.to_string()).or_insert(0.0);
                *w = w.max(discrepancy);
                records.push(IdentityRecord {
                    identity: name.to_string(),
                    d,
                    seed,
                    discrepancy,
                });
            }
        }
    }
    let passed = !records.is_empty() && worst.values().all(|&w| w <= options.tol);
    Ok(IdentityReport {
        records,
        worst,
        tol: options.tol,
        passed,
    })
}
