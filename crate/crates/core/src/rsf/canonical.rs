//! Orthogonal congruence of an antisymmetric matrix to 2×2 rotation blocks.

use serde::Serialize;

use super::matrix::{mat_mul, transpose};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 30;
const OFF_TOLERANCE: f64 = 1e-13;
const ANTISYMMETRY_TOLERANCE: f64 = 1e-12;

/// `Q` (row-major, orthogonal) with `QᵀAQ` block diagonal: block `i` sits on
/// columns `planes[i]` and reads `[[0, −θ_i], [θ_i, 0]]`. `rates` has
/// `⌊d/2⌋` entries sorted descending; zero rates are allowed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalRotation {
    pub d: usize,
    pub rates: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    pub planes: Vec<(usize, usize)>,
}

impl CanonicalRotation {
    /// `QᵀAQ`.
    pub fn conjugate(&self, a: &[f64]) -> Vec<f64> {
        let n = self.d;
        mat_mul(&mat_mul(&transpose(&self.q, n), a, n), &self.q, n)
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.d).map(|r| self.q[r * self.d + c]).collect()
    }
}

/// Block-diagonal canonical matrix with the given rates.
pub fn canonical_block_matrix(d: usize, rates: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for (i, &t) in rates.iter().enumerate() {
        let (p, q) = (2 * i, 2 * i + 1);
        m[p * d + q] = -t;
        m[q * d + p] = t;
    }
    m
}

/// Eigenpairs of a symmetric matrix by cyclic Jacobi. Returns eigenvalues
/// and eigenvectors as columns of a row-major matrix.
fn jacobi_eigen(mut s: Vec<f64>, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off = |s: &[f64]| {
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    acc += s[r * n + c] * s[r * n + c];
                }
            }
        }
        acc.sqrt()
    };
    let mut sweeps = 0;
    while off(&s) > OFF_TOLERANCE * frob {
        if sweeps == MAX_SWEEPS {
            return Err(Error::JacobiNoConvergence {
                sweeps,
                off: off(&s),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = s[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (s[q * n + q] - s[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (skp, skq) = (s[k * n + p], s[k * n + q]);
                    s[k * n + p] = c * skp - sn * skq;
                    s[k * n + q] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let (spk, sqk) = (s[p * n + k], s[q * n + k]);
                    s[p * n + k] = c * spk - sn * sqk;
                    s[q * n + k] = sn * spk + c * sqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
    }
    Ok(((0..n).map(|i| s[i * n + i]).collect(), v))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in against {
            let k = dot(v, q);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= k * y);
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Picks, among projections of the natural basis onto `span` with `used`
/// removed, the one of largest norm.
fn natural_pick(span: &[Vec<f64>], used: &[Vec<f64>], n: usize) -> Option<Vec<f64>> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for j in 0..n {
        let mut v: Vec<f64> = vec![0.0; n];
        for b in span {
            v.iter_mut().zip(b).for_each(|(x, y)| *x += b[j] * y);
        }
        orthogonalize(&mut v, used);
        let norm = dot(&v, &v).sqrt();
        if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
            best = Some((norm, v));
        }
    }
    best.and_then(|(norm, mut v)| {
        (norm > 1e-8).then(|| {
            normalize(&mut v);
            v
        })
    })
}

pub fn canonical_antisymmetric(a: &[f64], d: usize) -> Result<CanonicalRotation> {
    if a.len() != d * d {
        return Err(Error::NotSquare {
            rows: d,
            cols: a.len().checked_div(d).unwrap_or(0),
        });
    }
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut asym: f64 = 0.0;
    for r in 0..d {
        for c in 0..d {
            asym = asym.max((a[r * d + c] + a[c * d + r]).abs());
        }
    }
    if asym > ANTISYMMETRY_TOLERANCE * scale.max(1.0) {
        return Err(Error::NotAntisymmetric(asym));
    }
    let a: Vec<f64> = (0..d * d)
        .map(|i| 0.5 * (a[i] - a[(i % d) * d + i / d]))
        .collect();
    let s = mat_mul(&transpose(&a, d), &a, d);
    let (evals, evecs) = jacobi_eigen(s, d)?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| evals[j].total_cmp(&evals[i]).then(i.cmp(&j)));
    let lmax = evals.iter().fold(0.0f64, |m, &x| m.max(x));
    let cluster_tol = 1e-11 * lmax;
    let null_tol = 1e-20 * lmax;
    let column = |i: usize| -> Vec<f64> { (0..d).map(|r| evecs[r * d + i]).collect() };
    let apply =
        |v: &[f64]| -> Vec<f64> { (0..d).map(|r| dot(&a[r * d..(r + 1) * d], v)).collect() };

    let mut pairs: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
    let mut null: Vec<Vec<f64>> = Vec::new();
    let mut used: Vec<Vec<f64>> = Vec::new();
    let mut k = 0;
    while k < d {
        let mut end = k + 1;
        while end < d && (evals[order[k]] - evals[order[end]]).abs() <= cluster_tol {
            end += 1;
        }
        let span: Vec<Vec<f64>> = order[k..end].iter().map(|&i| column(i)).collect();
        let rotating = evals[order[k]] > null_tol;
        let mut left = end - k;
        while left > 0 {
            let Some(v1) = natural_pick(&span, &used, d) else {
                break;
            };
            if rotating && left >= 2 {
                let mut v2 = apply(&v1);
                orthogonalize(&mut v2, &used);
                let theta = normalize(&mut v2);
                used.push(v1.clone());
                used.push(v2.clone());
                pairs.push((theta, v1, v2));
                left -= 2;
            } else {
                used.push(v1.clone());
                null.push(v1);
                left -= 1;
            }
        }
        k = end;
    }
    // pair up null directions so every ⌊d/2⌋ slot has a block
    while pairs.len() < d / 2 && null.len() >= 2 {
        let v1 = null.remove(0);
        let v2 = null.remove(0);
        pairs.push((0.0, v1, v2));
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut q = vec![0.0; d * d];
    let mut col = 0;
    let mut planes = Vec::new();
    let mut rates = Vec::new();
    let mut put = |v: &[f64], col: usize| {
        for r in 0..d {
            q[r * d + col] = v[r];
        }
    };
    for (theta, v1, v2) in &pairs {
        put(v1, col);
        put(v2, col + 1);
        planes.push((col, col + 1));
        rates.push(*theta);
        col += 2;
    }
    for v in &null {
        put(v, col);
        col += 1;
    }
    if col != d {
        return Err(Error::JacobiNoConvergence {
            sweeps: MAX_SWEEPS,
            off: f64::NAN,
        });
    }
    Ok(CanonicalRotation {
        d,
        rates,
        q,
        planes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rsf::random_orthogonal;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_canonical(c: &CanonicalRotation, a: &[f64], tol: f64) {
        let d = c.d;
        let qtq = mat_mul(&transpose(&c.q, d), &c.q, d);
        let b = c.conjugate(a);
        let want = canonical_block_matrix(d, &c.rates);
        for i in 0..d * d {
            let e = if i / d == i % d { 1.0 } else { 0.0 };
            assert!((qtq[i] - e).abs() <= 1e-12, "QᵀQ entry {i}");
            assert!(
                (b[i] - want[i]).abs() <= tol,
                "block entry {i}: {} vs {}",
                b[i],
                want[i]
            );
        }
    }

    #[test]
    fn two_by_two() {
        let a = [0.0, -3.0, 3.0, 0.0];
        let c = canonical_antisymmetric(&a, 2).unwrap();
        assert_eq!(c.rates, vec![3.0]);
        assert_canonical(&c, &a, 1e-14);
    }

    #[test]
    fn three_d_vorticity_plane() {
        // entry (m, n) is half the dx_m∧dx_n coefficient of Ω
        let w = [0.3, -1.2, 0.8];
        let a = [
            0.0,
            0.5 * w[2],
            -0.5 * w[1],
            -0.5 * w[2],
            0.0,
            0.5 * w[0],
            0.5 * w[1],
            -0.5 * w[0],
            0.0,
        ];
        let c = canonical_antisymmetric(&a, 3).unwrap();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        // characteristic polynomial λ³ + (|ω|²/4)λ: eigenvalues ±i|ω|/2, 0
        assert!((c.rates[0] - 0.5 * norm).abs() < 1e-14);
        let axis = c.column(2);
        let cos = dot(&axis, &w).abs() / norm;
        assert!((cos - 1.0).abs() < 1e-12);
        assert_canonical(&c, &a, 1e-12);
    }

    #[test]
    fn conjugated_rates_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 2..=8 {
            for _ in 0..10 {
                let mut rates: Vec<f64> = (0..d / 2).map(|_| rng.gen_range(0.0..2.0)).collect();
                rates.sort_by(|x, y| y.total_cmp(x));
                let r = random_orthogonal(&mut rng, d);
                let a = mat_mul(
                    &mat_mul(&r, &canonical_block_matrix(d, &rates), d),
                    &transpose(&r, d),
                    d,
                );
                let c = canonical_antisymmetric(&a, d).unwrap();
                for (x, y) in c.rates.iter().zip(&rates) {
                    assert!((x - y).abs() < 1e-10, "d={d}: {:?} vs {rates:?}", c.rates);
                }
                assert_canonical(&c, &a, 1e-10);
                let frob: f64 = a.iter().map(|x| x * x).sum();
                let twice: f64 = c.rates.iter().map(|t| 2.0 * t * t).sum();
                assert!((frob - twice).abs() < 1e-10 * frob.max(1.0));
            }
        }
    }

    #[test]
    fn degenerate_and_zero_cases() {
        let a = canonical_block_matrix(4, &[1.0, 1.0]);
        let c = canonical_antisymmetric(&a, 4).unwrap();
        assert!((c.rates[0] - 1.0).abs() < 1e-14 && (c.rates[1] - 1.0).abs() < 1e-14);
        assert_canonical(&c, &a, 1e-12);

        let z = vec![0.0; 25];
        let c = canonical_antisymmetric(&z, 5).unwrap();
        assert_eq!(c.rates, vec![0.0, 0.0]);
        assert_canonical(&c, &z, 0.0);
    }

    #[test]
    fn rejects_symmetric_input() {
        let a = [0.0, 1.0, 1.0, 0.0];
        assert!(matches!(
            canonical_antisymmetric(&a, 2),
            Err(Error::NotAntisymmetric(_))
        ));
    }
}
