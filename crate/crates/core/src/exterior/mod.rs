//! Differential forms with sparse coefficient storage.
//!
//! A [`KForm`] maps strictly increasing index tuples to coefficients; absent
//! tuples are zero. Coefficients are anything implementing [`Coefficient`]:
//! sampled grid fields ([`ScalarField`], finite-difference derivatives) or
//! trigonometric polynomials ([`TrigPoly`], exact derivatives). All operators
//! are written once against the trait.
//!
//! Axes are 0-based in code and printed 1-based.

pub mod io;
mod ops;
mod pullback;

pub use ops::{
    antisym_matrix_rep, exterior_derivative, form_from_velocity, interior_product,
    lie_derivative_cartan, lie_derivative_components, velocity_from_form, wedge,
};
pub(crate) use pullback::determinant;
pub use pullback::{pullback, pullback_with, DiscreteMap};

use std::collections::BTreeMap;
use std::fmt;

use crate::fields::{partial_derivative, Grid, ScalarField, Scheme, TrigPoly};
use crate::{Error, Result};

/// Strictly increasing list of axes, the basis element `dx_i ∧ dx_j ∧ …`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexTuple(Vec<usize>);

/// Sorts `axes` and returns the permutation sign, or `None` on a repeat.
pub(crate) fn sort_with_sign(mut axes: Vec<usize>) -> Option<(Vec<usize>, f64)> {
    let mut sign = 1.0;
    for i in 1..axes.len() {
        let mut j = i;
        while j > 0 && axes[j - 1] > axes[j] {
            axes.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if axes.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((axes, sign))
    }
}

impl IndexTuple {
    pub fn new(axes: Vec<usize>) -> Result<Self> {
        if axes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTuple(format!(
                "{axes:?} is not strictly increasing"
            )));
        }
        Ok(IndexTuple(axes))
    }

    /// From 1-based axis numbers as written in `dx_1 ∧ dx_2`.
    pub fn one_based(axes: &[usize]) -> Result<Self> {
        if axes.contains(&0) {
            return Err(Error::InvalidTuple("1-based axes start at 1".into()));
        }
        Self::new(axes.iter().map(|a| a - 1).collect())
    }

    pub fn empty() -> Self {
        IndexTuple(Vec::new())
    }

    pub fn axes(&self) -> &[usize] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, axis: usize) -> bool {
        self.0.binary_search(&axis).is_ok()
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|a| a + 1).collect()
    }

    /// Inserts `axis`; the sign is `(-1)^position`.
    pub fn insert(&self, axis: usize) -> Option<(IndexTuple, f64)> {
        match self.0.binary_search(&axis) {
            Ok(_) => None,
            Err(pos) => {
                let mut v = self.0.clone();
                v.insert(pos, axis);
                Some((IndexTuple(v), if pos % 2 == 0 { 1.0 } else { -1.0 }))
            }
        }
    }

    pub fn remove_at(&self, slot: usize) -> IndexTuple {
        let mut v = self.0.clone();
        v.remove(slot);
        IndexTuple(v)
    }

    /// Replaces the axis in `slot` by `axis` and re-sorts with sign.
    pub fn replace_at(&self, slot: usize, axis: usize) -> Option<(IndexTuple, f64)> {
        let mut v = self.0.clone();
        v[slot] = axis;
        sort_with_sign(v).map(|(v, s)| (IndexTuple(v), s))
    }

    /// `self ∪ other` with the sign of the shuffle, `None` if they overlap.
    pub fn merge(&self, other: &IndexTuple) -> Option<(IndexTuple, f64)> {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        sort_with_sign(v).map(|(v, s)| (IndexTuple(v), s))
    }

    /// All tuples of `degree` axes drawn from `0..dim`, lexicographic.
    pub fn all(dim: usize, degree: usize) -> Vec<IndexTuple> {
        fn rec(
            start: usize,
            dim: usize,
            left: usize,
            cur: &mut Vec<usize>,
            out: &mut Vec<IndexTuple>,
        ) {
            if left == 0 {
                out.push(IndexTuple(cur.clone()));
                return;
            }
            for a in start..dim {
                cur.push(a);
                rec(a + 1, dim, left - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if degree <= dim {
            rec(0, dim, degree, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| (a + 1).to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// What a form coefficient must support.
pub trait Coefficient: Clone + fmt::Debug {
    /// Where the coefficient lives (a grid, or just a dimension).
    type Domain: Clone + PartialEq + fmt::Debug;

    fn domain(&self) -> Self::Domain;
    fn domain_dim(domain: &Self::Domain) -> usize;
    fn constant(domain: &Self::Domain, value: f64) -> Self;
    /// `self += factor · other`
    fn add_scaled(&mut self, other: &Self, factor: f64);
    fn mul(&self, other: &Self) -> Self;
    fn scaled(&self, factor: f64) -> Self;
    fn partial(&self, axis: usize) -> Self;
    fn is_zero(&self) -> bool;
    /// Sup norm, or an upper bound on it.
    fn sup_norm(&self) -> f64;
}

impl Coefficient for ScalarField {
    type Domain = Grid;

    fn domain(&self) -> Grid {
        self.grid().clone()
    }

    fn domain_dim(domain: &Grid) -> usize {
        domain.dim()
    }

    fn constant(domain: &Grid, value: f64) -> Self {
        ScalarField::constant(domain, value)
    }

    fn add_scaled(&mut self, other: &Self, factor: f64) {
        assert_eq!(self.grid(), other.grid(), "coefficient grids differ");
        for (a, b) in self.values_mut().iter_mut().zip(other.values()) {
            *a += factor * b;
        }
    }

    fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
            .expect("coefficient grids differ")
    }

    fn scaled(&self, factor: f64) -> Self {
        self.map(|v| factor * v)
    }

    fn partial(&self, axis: usize) -> Self {
        partial_derivative(self, axis, Scheme::Order4).expect("axis validated by caller")
    }

    fn is_zero(&self) -> bool {
        self.is_identically_zero()
    }

    fn sup_norm(&self) -> f64 {
        self.max_abs()
    }
}

impl Coefficient for TrigPoly {
    type Domain = usize;

    fn domain(&self) -> usize {
        self.dim()
    }

    fn domain_dim(domain: &usize) -> usize {
        *domain
    }

    fn constant(domain: &usize, value: f64) -> Self {
        TrigPoly::constant(*domain, value)
    }

    fn add_scaled(&mut self, other: &Self, factor: f64) {
        TrigPoly::add_scaled(self, other, factor)
    }

    fn mul(&self, other: &Self) -> Self {
        TrigPoly::mul(self, other)
    }

    fn scaled(&self, factor: f64) -> Self {
        TrigPoly::scaled(self, factor)
    }

    fn partial(&self, axis: usize) -> Self {
        TrigPoly::partial(self, axis)
    }

    fn is_zero(&self) -> bool {
        TrigPoly::is_zero(self)
    }

    fn sup_norm(&self) -> f64 {
        self.l1_norm()
    }
}

/// A degree-k differential form. Degrees above the dimension are allowed
/// but always empty.
#[derive(Debug, Clone, PartialEq)]
pub struct KForm<C: Coefficient> {
    domain: C::Domain,
    degree: usize,
    coeffs: BTreeMap<IndexTuple, C>,
}

impl<C: Coefficient> KForm<C> {
    pub fn zero(domain: &C::Domain, degree: usize) -> Self {
        KForm {
            domain: domain.clone(),
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        domain: &C::Domain,
        degree: usize,
        terms: impl IntoIterator<Item = (IndexTuple, C)>,
    ) -> Result<Self> {
        let mut form = Self::zero(domain, degree);
        for (tuple, c) in terms {
            form.check_tuple(&tuple)?;
            if c.domain() != *domain {
                return Err(Error::GridMismatch);
            }
            form.accumulate(tuple, &c, 1.0);
        }
        Ok(form)
    }

    /// `dx_{axes}` with a constant unit coefficient.
    pub fn basis(domain: &C::Domain, axes: &[usize]) -> Result<Self> {
        let tuple = IndexTuple::new(axes.to_vec())?;
        Self::from_terms(domain, tuple.degree(), [(tuple, C::constant(domain, 1.0))])
    }

    fn check_tuple(&self, tuple: &IndexTuple) -> Result<()> {
        if tuple.degree() != self.degree {
            return Err(Error::DegreeMismatch(format!(
                "tuple {tuple} in a {}-form",
                self.degree
            )));
        }
        if tuple.axes().iter().any(|&a| a >= self.dim()) {
            return Err(Error::InvalidTuple(format!(
                "{tuple} exceeds dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    pub(crate) fn accumulate(&mut self, tuple: IndexTuple, c: &C, factor: f64) {
        match self.coeffs.get_mut(&tuple) {
            Some(existing) => existing.add_scaled(c, factor),
            None => {
                let v = if factor == 1.0 {
                    c.clone()
                } else {
                    c.scaled(factor)
                };
                self.coeffs.insert(tuple, v);
            }
        }
    }

    pub(crate) fn accumulate_owned(&mut self, tuple: IndexTuple, c: C) {
        match self.coeffs.get_mut(&tuple) {
            Some(existing) => existing.add_scaled(&c, 1.0),
            None => {
                self.coeffs.insert(tuple, c);
            }
        }
    }

    pub fn domain(&self) -> &C::Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        C::domain_dim(&self.domain)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, tuple: &IndexTuple) -> Option<&C> {
        self.coeffs.get(tuple)
    }

    /// Stored tuples in lexicographic order.
    pub fn tuples(&self) -> impl Iterator<Item = &IndexTuple> {
        self.coeffs.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IndexTuple, &C)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Tuples whose coefficients are not identically zero.
    pub fn support(&self) -> Vec<IndexTuple> {
        self.coeffs
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(t, _)| t.clone())
            .collect()
    }

    /// Drops identically-zero coefficients.
    pub fn pruned(mut self) -> Self {
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(C::is_zero)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::GridMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(format!(
                "{} vs {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    /// `self + factor · other`
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (t, c) in &other.coeffs {
            out.accumulate(t.clone(), c, factor);
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        KForm {
            domain: self.domain.clone(),
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|(t, c)| (t.clone(), c.scaled(factor)))
                .collect(),
        }
    }

    /// Largest coefficient sup norm.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.values().map(C::sup_norm).fold(0.0, f64::max)
    }

    /// Coefficients restricted to the tuples in `keep`.
    pub fn restricted(&self, keep: impl Fn(&IndexTuple) -> bool) -> Self {
        KForm {
            domain: self.domain.clone(),
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(t, _)| keep(t))
                .map(|(t, c)| (t.clone(), c.clone()))
                .collect(),
        }
    }

    /// Same tuples, coefficients mapped through `f`.
    pub fn map_coefficients<D: Coefficient>(
        &self,
        domain: &D::Domain,
        f: impl Fn(&C) -> D,
    ) -> KForm<D> {
        KForm {
            domain: domain.clone(),
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|(t, c)| (t.clone(), f(c))).collect(),
        }
    }
}

impl KForm<ScalarField> {
    pub fn grid(&self) -> &Grid {
        &self.domain
    }

    /// `max_x Σ_I |ω_I(x)|`: sub-multiplicative under the wedge product.
    pub fn pointwise_l1_max(&self) -> f64 {
        let n = self.grid().len();
        (0..n)
            .map(|p| {
                self.coeffs
                    .values()
                    .map(|c| c.values()[p].abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Grid RMS of the coefficient vector, `sqrt(mean_x Σ_I ω_I(x)²)`.
    pub fn l2_norm(&self) -> f64 {
        let n = self.grid().len() as f64;
        (self
            .coeffs
            .values()
            .map(|c| c.values().iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            / n)
            .sqrt()
    }

    /// Coefficient values at one node for every stored tuple.
    pub fn at(&self, flat: usize) -> Vec<(IndexTuple, f64)> {
        self.coeffs
            .iter()
            .map(|(t, c)| (t.clone(), c.values()[flat]))
            .collect()
    }

    pub fn subsample(&self, stride: usize) -> Result<Self> {
        let grid = self.grid().subsample(stride)?;
        let mut out = KForm::zero(&grid, self.degree);
        for (t, c) in &self.coeffs {
            out.coeffs.insert(t.clone(), c.subsample(stride)?);
        }
        Ok(out)
    }
}

impl KForm<TrigPoly> {
    /// Samples every coefficient on `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<KForm<ScalarField>> {
        let mut out = KForm::zero(grid, self.degree);
        for (t, c) in &self.coeffs {
            out.coeffs.insert(t.clone(), c.sample(grid)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_sign_rules() {
        let t = IndexTuple::new(vec![0, 2]).unwrap();
        assert_eq!(t.insert(1).unwrap(), (IndexTuple(vec![0, 1, 2]), -1.0));
        assert_eq!(t.insert(3).unwrap(), (IndexTuple(vec![0, 2, 3]), 1.0));
        assert!(t.insert(2).is_none());
        assert_eq!(t.replace_at(0, 3).unwrap(), (IndexTuple(vec![2, 3]), -1.0));
        assert!(t.replace_at(0, 2).is_none());
        let (m, s) = IndexTuple(vec![1, 3])
            .merge(&IndexTuple(vec![0, 2]))
            .unwrap();
        assert_eq!(m, IndexTuple(vec![0, 1, 2, 3]));
        assert_eq!(s, -1.0);
        assert!(IndexTuple::new(vec![2, 1]).is_err());
        assert_eq!(IndexTuple::all(4, 2).len(), 6);
        assert_eq!(IndexTuple::all(3, 4).len(), 0);
        assert_eq!(t.to_string(), "(1,3)");
    }

    #[test]
    fn form_rejects_bad_tuples() {
        let r = KForm::<TrigPoly>::from_terms(
            &3,
            2,
            [(IndexTuple(vec![0, 3]), TrigPoly::constant(3, 1.0))],
        );
        assert!(r.is_err());
        let r = KForm::<TrigPoly>::from_terms(
            &3,
            1,
            [(IndexTuple(vec![0, 1]), TrigPoly::constant(3, 1.0))],
        );
        assert!(matches!(r, Err(Error::DegreeMismatch(_))));
    }
}
