//! Closed-form fields with exact derivatives.
//!
//! [`TrigPoly`] is a sparse real trigonometric polynomial
//! `Σ_k a_k cos(k·x) + b_k sin(k·x)` over integer wavevectors. Sums,
//! products and partial derivatives stay inside the class exactly, which is
//! what lets the exterior-calculus identities be checked at machine
//! precision.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Grid, ScalarField, VectorField};
use crate::{Error, Result};

type Wavevector = Vec<i32>;

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    terms: BTreeMap<Wavevector, (f64, f64)>,
}

/// Flips `k` so that its first nonzero entry is positive; returns whether a
/// flip happened (the sine coefficient changes sign).
fn canonicalize(k: &mut [i32]) -> bool {
    match k.iter().find(|&&c| c != 0) {
        Some(&c) if c < 0 => {
            k.iter_mut().for_each(|c| *c = -*c);
            true
        }
        _ => false,
    }
}

impl TrigPoly {
    pub fn zero(dim: usize) -> Self {
        TrigPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], value, 0.0);
        p
    }

    /// `amp · cos(k·x)`
    pub fn cos_mode(k: &[i32], amp: f64) -> Self {
        let mut p = Self::zero(k.len());
        p.add_term(k.to_vec(), amp, 0.0);
        p
    }

    /// `amp · sin(k·x)`
    pub fn sin_mode(k: &[i32], amp: f64) -> Self {
        let mut p = Self::zero(k.len());
        p.add_term(k.to_vec(), 0.0, amp);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Adds `a cos(k·x) + b sin(k·x)`.
    pub fn add_term(&mut self, mut k: Wavevector, a: f64, mut b: f64) {
        assert_eq!(k.len(), self.dim, "wavevector dimension");
        if canonicalize(&mut k) {
            b = -b;
        }
        if k.iter().all(|&c| c == 0) {
            b = 0.0;
        }
        if a == 0.0 && b == 0.0 {
            return;
        }
        let entry = self.terms.entry(k).or_insert((0.0, 0.0));
        entry.0 += a;
        entry.1 += b;
    }

    fn prune(mut self) -> Self {
        self.terms.retain(|_, (a, b)| *a != 0.0 || *b != 0.0);
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, &(a, b))| {
                let phase: f64 = k.iter().zip(x).map(|(&k, &x)| k as f64 * x).sum();
                a * phase.cos() + b * phase.sin()
            })
            .sum()
    }

    pub fn partial(&self, axis: usize) -> Self {
        assert!(axis < self.dim, "axis {axis} out of range");
        let mut out = Self::zero(self.dim);
        for (k, &(a, b)) in &self.terms {
            let kj = k[axis] as f64;
            if kj != 0.0 {
                out.terms.insert(k.clone(), (kj * b, -kj * a));
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zero(self.dim);
        for (k1, &(a1, b1)) in &self.terms {
            for (k2, &(a2, b2)) in &other.terms {
                let sum: Wavevector = k1.iter().zip(k2).map(|(x, y)| x + y).collect();
                let diff: Wavevector = k1.iter().zip(k2).map(|(x, y)| x - y).collect();
                out.add_term(sum, 0.5 * (a1 * a2 - b1 * b2), 0.5 * (b1 * a2 + a1 * b2));
                out.add_term(diff, 0.5 * (a1 * a2 + b1 * b2), 0.5 * (b1 * a2 - a1 * b2));
            }
        }
        out.prune()
    }

    /// `self += factor · other`
    pub fn add_scaled(&mut self, other: &Self, factor: f64) {
        assert_eq!(self.dim, other.dim);
        for (k, &(a, b)) in &other.terms {
            let entry = self.terms.entry(k.clone()).or_insert((0.0, 0.0));
            entry.0 += factor * a;
            entry.1 += factor * b;
        }
        self.terms.retain(|_, (a, b)| *a != 0.0 || *b != 0.0);
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|(a, b)| {
            *a *= factor;
            *b *= factor;
        });
        out.prune()
    }

    /// Σ |a_k| + |b_k|, an upper bound on the sup norm.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|(a, b)| a.abs() + b.abs()).sum()
    }

    /// Root-mean-square over the periodic box.
    pub fn rms(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, &(a, b))| {
                if k.iter().all(|&c| c == 0) {
                    a * a
                } else {
                    0.5 * (a * a + b * b)
                }
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn depends_on(&self, axis: usize) -> bool {
        self.terms.keys().any(|k| k[axis] != 0)
    }

    /// Embeds into a higher-dimensional space (new trailing axes unused).
    pub fn extended(&self, dim: usize) -> Self {
        assert!(dim >= self.dim);
        let terms = self
            .terms
            .iter()
            .map(|(k, &v)| {
                let mut k = k.clone();
                k.resize(dim, 0);
                (k, v)
            })
            .collect();
        TrigPoly { dim, terms }
    }

    /// Evaluates on every node of `grid`. Per-axis phase factors are built
    /// once and multiplied progressively, one complex product per node and
    /// term in the innermost loop.
    pub fn sample(&self, grid: &Grid) -> Result<ScalarField> {
        if grid.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}-d polynomial sampled on a {}-d grid",
                self.dim,
                grid.dim()
            )));
        }
        let mut out = vec![0.0; grid.len()];
        for (k, &(a, b)) in &self.terms {
            let tables: Vec<Vec<(f64, f64)>> = (0..self.dim)
                .map(|ax| {
                    let h = grid.spacing(ax);
                    (0..grid.dims()[ax])
                        .map(|i| {
                            let th = k[ax] as f64 * i as f64 * h;
                            (th.cos(), th.sin())
                        })
                        .collect()
                })
                .collect();
            accumulate(&tables, 0, (1.0, 0.0), &mut out, 0, grid.dims(), a, b);
        }
        Ok(ScalarField::from_raw(grid.clone(), out))
    }
}

#[allow(clippy::too_many_arguments)]
fn accumulate(
    tables: &[Vec<(f64, f64)>],
    axis: usize,
    phase: (f64, f64),
    out: &mut [f64],
    offset: usize,
    dims: &[usize],
    a: f64,
    b: f64,
) {
    let last = axis + 1 == dims.len();
    let stride: usize = dims[axis + 1..].iter().product();
    for (i, &(c, s)) in tables[axis].iter().enumerate() {
        let p = (phase.0 * c - phase.1 * s, phase.0 * s + phase.1 * c);
        if last {
            out[offset + i] += a * p.0 + b * p.1;
        } else {
            accumulate(tables, axis + 1, p, out, offset + i * stride, dims, a, b);
        }
    }
}

fn random_coefficients(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn normalized(mut p: TrigPoly) -> TrigPoly {
    let rms = p.rms();
    if rms > 0.0 {
        p = p.scaled(1.0 / rms);
    }
    p
}

/// All canonical wavevectors with `1 <= |k|_∞ <= kmax`, zero on masked-out
/// axes, in lexicographic order.
fn band_wavevectors(kmax: i32, axes: &[bool]) -> Vec<Wavevector> {
    let d = axes.len();
    let mut out = Vec::new();
    let mut k = vec![-kmax; d];
    loop {
        let allowed = k.iter().zip(axes).all(|(&c, &on)| on || c == 0);
        let mut canon = k.clone();
        if allowed && !k.iter().all(|&c| c == 0) && !canonicalize(&mut canon) {
            out.push(k.clone());
        }
        let mut a = d;
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            if k[a] < kmax {
                k[a] += 1;
                break;
            }
            k[a] = -kmax;
        }
    }
}

fn band_limited_with(rng: &mut ChaCha8Rng, kmax: i32, axes: &[bool]) -> TrigPoly {
    let mut p = TrigPoly::zero(axes.len());
    for k in band_wavevectors(kmax, axes) {
        let (a, b) = random_coefficients(rng);
        p.add_term(k, a, b);
    }
    normalized(p)
}

fn sparse_with(rng: &mut ChaCha8Rng, kmax: i32, axes: &[bool], modes: usize) -> TrigPoly {
    let mut p = TrigPoly::zero(axes.len());
    if axes.iter().all(|&on| !on) {
        return TrigPoly::constant(axes.len(), rng.gen_range(-1.0..1.0));
    }
    // distinct wavevectors up to sign: ((2 kmax + 1)^m - 1) / 2
    let enabled = axes.iter().filter(|&&on| on).count() as u32;
    let available = (2 * kmax as usize + 1)
        .saturating_pow(enabled)
        .saturating_sub(1)
        / 2;
    let modes = modes.min(available);
    while p.num_terms() < modes {
        let k: Wavevector = axes
            .iter()
            .map(|&on| if on { rng.gen_range(-kmax..=kmax) } else { 0 })
            .collect();
        if k.iter().all(|&c| c == 0) {
            continue;
        }
        let (a, b) = random_coefficients(rng);
        p.add_term(k, a, b);
    }
    normalized(p)
}

/// Unit-RMS random field containing every mode with `|k|_∞ <= kmax` on the
/// enabled axes. Deterministic in `seed`.
pub fn band_limited_random(seed: u64, kmax: i32, axes: &[bool]) -> TrigPoly {
    band_limited_with(&mut ChaCha8Rng::seed_from_u64(seed), kmax, axes)
}

/// Unit-RMS random field with `modes` random wavevectors, suitable for high
/// dimensions where the full band is too large.
pub fn sparse_trig_random(seed: u64, kmax: i32, axes: &[bool], modes: usize) -> TrigPoly {
    sparse_with(&mut ChaCha8Rng::seed_from_u64(seed), kmax, axes, modes)
}

/// A closed-form (possibly time-dependent) field with exact derivatives.
pub trait AnalyticField {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn ncomp(&self) -> usize;
    fn eval(&self, x: &[f64], t: f64) -> Vec<f64>;
    /// ∂/∂x_axis of every component.
    fn eval_derivative(&self, x: &[f64], t: f64, axis: usize) -> Vec<f64>;

    fn sample(&self, grid: &Grid, t: f64) -> Result<VectorField> {
        if grid.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} is {}-d, grid is {}-d",
                self.name(),
                self.dim(),
                grid.dim()
            )));
        }
        let mut comps = vec![Vec::with_capacity(grid.len()); self.ncomp()];
        for p in 0..grid.len() {
            for (c, v) in self.eval(&grid.node(p), t).into_iter().enumerate() {
                comps[c].push(v);
            }
        }
        VectorField::new(
            comps
                .into_iter()
                .map(|v| ScalarField::new(grid.clone(), v))
                .collect::<Result<_>>()?,
        )
    }
}

/// Steady vector field whose components are trigonometric polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigField {
    name: String,
    components: Vec<TrigPoly>,
    pressure: Option<TrigPoly>,
}

impl TrigField {
    pub fn new(name: impl Into<String>, components: Vec<TrigPoly>) -> Self {
        TrigField {
            name: name.into(),
            components,
            pressure: None,
        }
    }

    pub fn with_pressure(mut self, pressure: TrigPoly) -> Self {
        self.pressure = Some(pressure);
        self
    }

    pub fn components(&self) -> &[TrigPoly] {
        &self.components
    }

    /// Pressure-like potential Π with ∇Π = ∇p/ρ, when the field is a known
    /// Euler solution.
    pub fn pressure(&self) -> Option<&TrigPoly> {
        self.pressure.as_ref()
    }

    /// `(sin x1 cos x2, -cos x1 sin x2)`, a steady Euler solution with
    /// `Π = (cos 2x1 + cos 2x2)/4`.
    pub fn taylor_green_2d() -> Self {
        let sc = TrigPoly::sin_mode(&[1, 0], 1.0).mul(&TrigPoly::cos_mode(&[0, 1], 1.0));
        let cs = TrigPoly::cos_mode(&[1, 0], 1.0).mul(&TrigPoly::sin_mode(&[0, 1], 1.0));
        let mut pressure = TrigPoly::cos_mode(&[2, 0], 0.25);
        pressure.add_scaled(&TrigPoly::cos_mode(&[0, 2], 0.25), 1.0);
        TrigField::new("taylor_green_2d", vec![sc, cs.scaled(-1.0)]).with_pressure(pressure)
    }

    /// `(-sin x2, sin x1, 0, …)` in `d >= 2` dimensions: a periodic analog of
    /// rigid rotation about the origin.
    pub fn rigid_rotation(d: usize) -> Self {
        let mut k2 = vec![0; d];
        k2[1] = 1;
        let mut k1 = vec![0; d];
        k1[0] = 1;
        let mut comps = vec![TrigPoly::sin_mode(&k2, -1.0), TrigPoly::sin_mode(&k1, 1.0)];
        comps.resize(d, TrigPoly::zero(d));
        TrigField::new("rigid_rotation", comps)
    }

    /// `ncomp` independent sparse random components in `d` dimensions.
    pub fn trig_random(seed: u64, kmax: i32, d: usize, ncomp: usize, modes: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let axes = vec![true; d];
        let comps = (0..ncomp)
            .map(|_| sparse_with(&mut rng, kmax, &axes, modes))
            .collect();
        TrigField::new("trig_random", comps)
    }

    /// `ncomp` independent full-band random components in `d` dimensions.
    pub fn band_limited(seed: u64, kmax: i32, d: usize, ncomp: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let axes = vec![true; d];
        let comps = (0..ncomp)
            .map(|_| band_limited_with(&mut rng, kmax, &axes))
            .collect();
        TrigField::new("band_limited_random", comps)
    }
}

impl AnalyticField for TrigField {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.components.first().map_or(0, TrigPoly::dim)
    }

    fn ncomp(&self) -> usize {
        self.components.len()
    }

    fn eval(&self, x: &[f64], _t: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    fn eval_derivative(&self, x: &[f64], _t: f64, axis: usize) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.partial(axis).eval(x))
            .collect()
    }

    fn sample(&self, grid: &Grid, _t: f64) -> Result<VectorField> {
        VectorField::new(
            self.components
                .iter()
                .map(|c| c.sample(grid))
                .collect::<Result<_>>()?,
        )
    }
}

/// Looks up a closed-form field by name. Parameterised entries use
/// `name(key=value,…)`:
///
/// * `taylor_green_2d`
/// * `rigid_rotation(d=2)`
/// * `trig_random(seed=0,kmax=2,d=3,ncomp=d,modes=4)`
/// * `band_limited_random(seed=0,kmax=2,d=3,ncomp=d)`
pub fn analytic_registry(name: &str) -> Result<TrigField> {
    let unknown = || Error::UnknownAnalytic(name.to_string());
    let (base, args) = match name.find('(') {
        Some(open) if name.ends_with(')') => (&name[..open], &name[open + 1..name.len() - 1]),
        Some(_) => return Err(unknown()),
        None => (name, ""),
    };
    let mut params = BTreeMap::new();
    for kv in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(unknown)?;
        let v: i64 = v.trim().parse().map_err(|_| unknown())?;
        params.insert(k.trim().to_string(), v);
    }
    let allowed: &[&str] = match base.trim() {
        "taylor_green_2d" => &[],
        "rigid_rotation" => &["d"],
        "trig_random" => &["seed", "kmax", "d", "ncomp", "modes"],
        "band_limited_random" => &["seed", "kmax", "d", "ncomp"],
        _ => return Err(unknown()),
    };
    if params.keys().any(|k| !allowed.contains(&k.as_str())) || params.values().any(|&v| v < 0) {
        return Err(unknown());
    }
    let get = |k: &str, default: i64| params.get(k).copied().unwrap_or(default);
    let d = get(
        "d",
        if base.trim() == "rigid_rotation" {
            2
        } else {
            3
        },
    ) as usize;
    if d == 0 {
        return Err(unknown());
    }
    Ok(match base.trim() {
        "taylor_green_2d" => TrigField::taylor_green_2d(),
        "rigid_rotation" if d >= 2 => TrigField::rigid_rotation(d),
        "trig_random" => TrigField::trig_random(
            get("seed", 0) as u64,
            get("kmax", 2).max(1) as i32,
            d,
            get("ncomp", d as i64) as usize,
            get("modes", 4).max(1) as usize,
        ),
        "band_limited_random" => TrigField::band_limited(
            get("seed", 0) as u64,
            get("kmax", 2).max(1) as i32,
            d,
            get("ncomp", d as i64) as usize,
        ),
        _ => return Err(unknown()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{partial_derivative, Scheme};

    #[test]
    fn product_and_derivative_match_pointwise_evaluation() {
        let p = sparse_trig_random(1, 3, &[true, true, true], 5);
        let q = sparse_trig_random(2, 2, &[true, true, true], 4);
        let pq = p.mul(&q);
        let dp = p.partial(1);
        for x in [[0.1, 0.2, 0.3], [1.5, -2.0, 4.0], [3.0, 0.0, 6.0]] {
            assert!((pq.eval(&x) - p.eval(&x) * q.eval(&x)).abs() < 1e-13);
            let h = 1e-5;
            let fd =
                (p.eval(&[x[0], x[1] + h, x[2]]) - p.eval(&[x[0], x[1] - h, x[2]])) / (2.0 * h);
            assert!((dp.eval(&x) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn sampling_matches_eval() {
        let g = Grid::new(vec![8, 10, 12], vec![std::f64::consts::TAU; 3]).unwrap();
        let p = band_limited_random(3, 2, &[true, true, true]);
        let s = p.sample(&g).unwrap();
        for node in [0, 17, 400, g.len() - 1] {
            assert!((s.values()[node] - p.eval(&g.node(node))).abs() < 1e-13);
        }
        assert!((p.rms() - 1.0).abs() < 1e-14);
        assert!((s.rms() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn masked_axes_are_independent() {
        let p = band_limited_random(9, 2, &[true, true, false]);
        assert!(!p.depends_on(2));
        assert!(p.partial(2).is_zero());
        assert_eq!(
            band_wavevectors(2, &[true, true, true]).len(),
            (125 - 1) / 2
        );
    }

    #[test]
    fn taylor_green_properties() {
        let tg = analytic_registry("taylor_green_2d").unwrap();
        assert_eq!(tg.eval(&[0.0, 0.0], 0.0), vec![0.0, 0.0]);
        let [u1, u2] = [&tg.components()[0], &tg.components()[1]];
        let mut div = u1.partial(0);
        div.add_scaled(&u2.partial(1), 1.0);
        assert!(div.l1_norm() < 1e-15);
        // steady Euler residual u·∇u + ∇Π, symbolically
        let pi = tg.pressure().unwrap();
        for (c, u) in [u1, u2].into_iter().enumerate() {
            let mut r = u1.mul(&u.partial(0));
            r.add_scaled(&u2.mul(&u.partial(1)), 1.0);
            r.add_scaled(&pi.partial(c), 1.0);
            assert!(r.l1_norm() < 1e-15, "component {c}: {}", r.l1_norm());
        }
    }

    #[test]
    fn registry_rejects_unknown_names() {
        assert!(matches!(
            analytic_registry("kolmogorov"),
            Err(Error::UnknownAnalytic(_))
        ));
        assert!(analytic_registry("trig_random(seed=1,bogus=2)").is_err());
        let f = analytic_registry("trig_random(seed=4,kmax=2,d=5)").unwrap();
        assert_eq!((f.dim(), f.ncomp()), (5, 5));
        assert_eq!(analytic_registry("rigid_rotation(d=3)").unwrap().ncomp(), 3);
    }

    #[test]
    fn derivative_evaluator_matches_finite_differences_at_fourth_order() {
        let f = analytic_registry("band_limited_random(seed=3,kmax=2,d=2,ncomp=2)").unwrap();
        let err = |n: usize| {
            let g = Grid::cube(2, n).unwrap();
            let sampled = f.sample(&g, 0.0).unwrap();
            let mut e: f64 = 0.0;
            for axis in 0..2 {
                let fd: Vec<_> = sampled
                    .components()
                    .iter()
                    .map(|c| partial_derivative(c, axis, Scheme::Order4).unwrap())
                    .collect();
                for p in 0..g.len() {
                    let exact = f.eval_derivative(&g.node(p), 0.0, axis);
                    for c in 0..2 {
                        e = e.max((fd[c].values()[p] - exact[c]).abs());
                    }
                }
            }
            e
        };
        let errors = [err(16), err(32), err(64)];
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 3.5, "observed order {order}");
        }
    }
}
