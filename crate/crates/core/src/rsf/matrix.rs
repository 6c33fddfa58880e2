//! Small dense row-major matrices and the gradient D/A split.

use rand::Rng;

use crate::fields::TensorField;
use crate::{Error, Result};

pub fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            t[c * n + r] = a[r * n + c];
        }
    }
    t
}

pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for k in 0..n {
            let x = a[r * n + k];
            for c in 0..n {
                out[r * n + c] += x * b[k * n + c];
            }
        }
    }
    out
}

/// Orthogonal matrix from Gram–Schmidt on uniform random columns.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for _ in 0..2 {
                for q in &cols {
                    let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-3 {
                break;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
        if cols.len() == n {
            let mut q = vec![0.0; n * n];
            for (c, col) in cols.iter().enumerate() {
                for (r, v) in col.iter().enumerate() {
                    q[r * n + c] = *v;
                }
            }
            return q;
        }
    }
}

/// `D = (G + Gᵀ)/2`, `A = (G − Gᵀ)/2`.
pub fn sym_antisym_split(g: &TensorField) -> Result<(TensorField, TensorField)> {
    let n = g.rows();
    if g.cols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: g.cols(),
        });
    }
    let mut sym = Vec::with_capacity(n * n);
    let mut anti = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let (a, b) = (g.entry(r, c), g.entry(c, r));
            sym.push(a.zip_with(b, |x, y| 0.5 * (x + y))?);
            anti.push(a.zip_with(b, |x, y| 0.5 * (x - y))?);
        }
    }
    Ok((TensorField::new(n, n, sym)?, TensorField::new(n, n, anti)?))
}
