//! Exterior calculus operators, generic over the coefficient type.

use super::{Coefficient, IndexTuple, KForm};
use crate::fields::{ScalarField, TensorField};
use crate::{Error, Result};

fn check_velocity<C: Coefficient>(u: &[C], domain: &C::Domain) -> Result<()> {
    let d = C::domain_dim(domain);
    if u.len() > d {
        return Err(Error::DimensionMismatch(format!(
            "{} velocity components in dimension {d}",
            u.len()
        )));
    }
    if u.iter().any(|c| c.domain() != *domain) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// The 1-form `Σ u_i dx_i`, one stored tuple per component.
pub fn form_from_velocity<C: Coefficient>(u: &[C]) -> Result<KForm<C>> {
    let first = u
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty velocity".into()))?;
    let domain = first.domain();
    check_velocity(u, &domain)?;
    let mut form = KForm::zero(&domain, 1);
    for (i, c) in u.iter().enumerate() {
        form.coeffs.insert(IndexTuple(vec![i]), c.clone());
    }
    Ok(form)
}

/// Components of a 1-form, one per axis; absent tuples give zeros.
pub fn velocity_from_form<C: Coefficient>(form: &KForm<C>) -> Result<Vec<C>> {
    if form.degree() != 1 {
        return Err(Error::DegreeMismatch(format!(
            "expected a 1-form, got degree {}",
            form.degree()
        )));
    }
    Ok((0..form.dim())
        .map(|i| match form.get(&IndexTuple(vec![i])) {
            Some(c) => c.clone(),
            None => C::constant(form.domain(), 0.0),
        })
        .collect())
}

/// `dω`: the coefficient of `I` is `Σ_m (-1)^m ∂_{i_m} ω_{I∖i_m}`.
pub fn exterior_derivative<C: Coefficient>(form: &KForm<C>) -> KForm<C> {
    let mut out = KForm::zero(form.domain(), form.degree() + 1);
    for (tuple, c) in form.iter() {
        for axis in 0..form.dim() {
            if let Some((target, sign)) = tuple.insert(axis) {
                out.accumulate_owned(target, c.partial(axis).scaled(sign));
            }
        }
    }
    out
}

/// `α ∧ β`, signs from the shuffle permutation.
pub fn wedge<C: Coefficient>(alpha: &KForm<C>, beta: &KForm<C>) -> Result<KForm<C>> {
    if alpha.domain() != beta.domain() {
        return Err(Error::GridMismatch);
    }
    let mut out = KForm::zero(alpha.domain(), alpha.degree() + beta.degree());
    for (ta, ca) in alpha.iter() {
        for (tb, cb) in beta.iter() {
            if let Some((target, sign)) = ta.merge(tb) {
                out.accumulate_owned(target, ca.mul(cb).scaled(sign));
            }
        }
    }
    Ok(out)
}

/// `ι_u ω`. Velocity components beyond `u.len()` are zero.
pub fn interior_product<C: Coefficient>(u: &[C], form: &KForm<C>) -> Result<KForm<C>> {
    if form.degree() == 0 {
        return Err(Error::DegreeMismatch("interior product of a 0-form".into()));
    }
    check_velocity(u, form.domain())?;
    let mut out = KForm::zero(form.domain(), form.degree() - 1);
    for (tuple, c) in form.iter() {
        for (m, &axis) in tuple.axes().iter().enumerate() {
            if let Some(ua) = u.get(axis) {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out.accumulate_owned(tuple.remove_at(m), ua.mul(c).scaled(sign));
            }
        }
    }
    Ok(out)
}

/// `L_u ω = ι_u dω + d ι_u ω`.
pub fn lie_derivative_cartan<C: Coefficient>(u: &[C], form: &KForm<C>) -> Result<KForm<C>> {
    check_velocity(u, form.domain())?;
    if form.degree() > form.dim() {
        return Ok(KForm::zero(form.domain(), form.degree()));
    }
    let mut out = interior_product(u, &exterior_derivative(form))?;
    if form.degree() > 0 {
        let inner = exterior_derivative(&interior_product(u, form)?);
        for (t, c) in inner.iter() {
            out.accumulate(t.clone(), c, 1.0);
        }
    }
    Ok(out)
}

/// `L_u ω` from the component formula
/// `(L_u ω)_I = Σ_k u_k ∂_k ω_I + Σ_m Σ_k ω_{I[m→k]} ∂_{i_m} u_k`.
pub fn lie_derivative_components<C: Coefficient>(u: &[C], form: &KForm<C>) -> Result<KForm<C>> {
    check_velocity(u, form.domain())?;
    let d = form.dim();
    let mut out = KForm::zero(form.domain(), form.degree());
    for (tuple, c) in form.iter() {
        for (k, uk) in u.iter().enumerate() {
            out.accumulate_owned(tuple.clone(), uk.mul(&c.partial(k)));
        }
        for (m, &k) in tuple.axes().iter().enumerate() {
            let Some(uk) = u.get(k) else { continue };
            for axis in 0..d {
                if let Some((target, sign)) = tuple.replace_at(m, axis) {
                    out.accumulate_owned(target, c.mul(&uk.partial(axis)).scaled(sign));
                }
            }
        }
    }
    Ok(out)
}

/// Antisymmetric matrix of a 2-form: entry `(m, n)` is half the
/// coefficient of `dx_m ∧ dx_n`, so `A_{nm} = -A_{mn}`. For `Ω = dU` this is
/// `(G - Gᵀ)/2` with `G_{rc} = ∂_r u_c`.
pub fn antisym_matrix_rep(form: &KForm<ScalarField>) -> Result<TensorField> {
    if form.degree() != 2 {
        return Err(Error::DegreeMismatch(format!(
            "expected a 2-form, got degree {}",
            form.degree()
        )));
    }
    let d = form.dim();
    let grid = form.grid();
    let mut entries = vec![ScalarField::zeros(grid); d * d];
    for (tuple, c) in form.iter() {
        let (m, n) = (tuple.axes()[0], tuple.axes()[1]);
        entries[m * d + n] = c.scaled(0.5);
        entries[n * d + m] = c.scaled(-0.5);
    }
    TensorField::new(d, d, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{gradient_tensor, Grid, TrigField, TrigPoly, VectorField};

    fn tp(d: usize) -> impl Fn(&[i32], f64, f64) -> TrigPoly {
        move |k: &[i32], a: f64, b: f64| {
            let mut p = TrigPoly::zero(d);
            p.add_term(k.to_vec(), a, b);
            p
        }
    }

    fn close(a: &KForm<TrigPoly>, b: &KForm<TrigPoly>) -> f64 {
        a.sub(b).unwrap().iter().map(|(_, c)| c.l1_norm()).sum()
    }

    #[test]
    fn velocity_round_trip_is_exact() {
        let f = TrigField::trig_random(3, 2, 4, 4, 3);
        let form = form_from_velocity(f.components()).unwrap();
        assert_eq!(velocity_from_form(&form).unwrap(), f.components());
    }

    #[test]
    fn constant_unit_velocity_gives_dx1() {
        let g = Grid::cube(3, 8).unwrap();
        let u = vec![
            ScalarField::constant(&g, 1.0),
            ScalarField::zeros(&g),
            ScalarField::zeros(&g),
        ];
        let form = form_from_velocity(&u).unwrap();
        assert_eq!(form.support(), vec![IndexTuple(vec![0])]);
    }

    #[test]
    fn rotation_curl_is_cos_sum_dx1_dx2() {
        let f = TrigField::rigid_rotation(3);
        let w = exterior_derivative(&form_from_velocity(f.components()).unwrap()).pruned();
        assert_eq!(w.support(), vec![IndexTuple(vec![0, 1])]);
        let c = w.get(&IndexTuple(vec![0, 1])).unwrap();
        let mut expected = TrigPoly::cos_mode(&[1, 0, 0], 1.0);
        expected.add_scaled(&TrigPoly::cos_mode(&[0, 1, 0], 1.0), 1.0);
        let mut diff = c.clone();
        diff.add_scaled(&expected, -1.0);
        assert!(diff.l1_norm() < 1e-14, "{c:?}");
    }

    #[test]
    fn wedge_sign_and_square() {
        let dx1 = KForm::<TrigPoly>::basis(&3, &[0]).unwrap();
        let dx2 = KForm::<TrigPoly>::basis(&3, &[1]).unwrap();
        let a = wedge(&dx1, &dx2).unwrap();
        let b = wedge(&dx2, &dx1).unwrap();
        assert!(close(&a, &b.scaled(-1.0)) == 0.0);
        assert!(wedge(&dx1, &dx1).unwrap().is_empty());
    }

    #[test]
    fn interior_product_examples() {
        let f = tp(3);
        let u = vec![
            f(&[1, 0, 0], 1.0, 0.0),
            f(&[0, 1, 0], 0.0, 1.0),
            TrigPoly::zero(3),
        ];
        let area = KForm::<TrigPoly>::basis(&3, &[0, 1]).unwrap();
        let i = interior_product(&u, &area).unwrap();
        assert_eq!(i.get(&IndexTuple(vec![1])).unwrap(), &u[0]);
        assert_eq!(i.get(&IndexTuple(vec![0])).unwrap(), &u[1].scaled(-1.0));

        let uf = form_from_velocity(&u).unwrap();
        let sq = interior_product(&u, &uf).unwrap();
        let expected = u[0].mul(&u[0]);
        let mut e = expected;
        e.add_scaled(&u[1].mul(&u[1]), 1.0);
        let mut diff = sq.get(&IndexTuple::empty()).unwrap().clone();
        diff.add_scaled(&e, -1.0);
        assert!(diff.l1_norm() < 1e-14);
        assert!(interior_product(&u, &KForm::<TrigPoly>::basis(&3, &[]).unwrap()).is_err());
    }

    #[test]
    fn lie_formulas_agree_on_random_fields() {
        for seed in 0..5 {
            let d = 3 + seed as usize % 3;
            let u = TrigField::trig_random(seed, 2, d, d, 3);
            let w1 =
                form_from_velocity(TrigField::trig_random(seed + 100, 2, d, d, 3).components())
                    .unwrap();
            let w2 = exterior_derivative(&w1);
            for w in [&w1, &w2] {
                let a = lie_derivative_cartan(u.components(), w).unwrap();
                let b = lie_derivative_components(u.components(), w).unwrap();
                assert!(close(&a, &b) < 1e-11, "seed {seed} degree {}", w.degree());
            }
            let scalar =
                KForm::from_terms(&d, 0, [(IndexTuple::empty(), u.components()[0].clone())])
                    .unwrap();
            let a = lie_derivative_cartan(u.components(), &scalar).unwrap();
            let b = lie_derivative_components(u.components(), &scalar).unwrap();
            assert!(close(&a, &b) < 1e-11);
        }
    }

    #[test]
    fn exterior_derivative_of_top_form_is_zero() {
        let top = KForm::<TrigPoly>::basis(&3, &[0, 1, 2]).unwrap();
        let d = exterior_derivative(&top);
        assert_eq!(d.degree(), 4);
        assert!(d.is_empty());
    }

    #[test]
    fn matrix_rep_matches_gradient_antisymmetric_part() {
        let g = Grid::cube(3, 16).unwrap();
        let f = TrigField::trig_random(9, 2, 3, 3, 4);
        let u: Vec<ScalarField> = f
            .components()
            .iter()
            .map(|c| c.sample(&g).unwrap())
            .collect();
        let omega = exterior_derivative(&form_from_velocity(&u).unwrap());
        let a = antisym_matrix_rep(&omega).unwrap();
        let grad = gradient_tensor(&VectorField::new(u).unwrap()).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let half = grad
                    .entry(r, c)
                    .zip_with(grad.entry(c, r), |x, y| 0.5 * (x - y))
                    .unwrap();
                let diff = half.zip_with(a.entry(r, c), |x, y| x - y).unwrap();
                assert!(
                    diff.max_abs() <= 1e-12 * (1.0 + half.max_abs()),
                    "entry {r},{c}"
                );
            }
        }
    }
}
