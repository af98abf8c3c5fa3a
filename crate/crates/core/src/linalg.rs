//! Small dense LU factorisation with partial pivoting.

use alloc::vec::Vec;

/// LU factors of a square matrix stored row-major, `P A = L U`.
pub(crate) struct Lu {
    dim: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Factorises `a` (row-major, `dim * dim`). Returns `None` if a pivot
    /// vanishes.
    pub(crate) fn factor(mut a: Vec<f64>, dim: usize) -> Option<Self> {
        debug_assert_eq!(a.len(), dim * dim);
        let mut perm: Vec<usize> = (0..dim).collect();
        for k in 0..dim {
            let mut pivot = k;
            let mut best = a[k * dim + k].abs();
            for i in k + 1..dim {
                let v = a[i * dim + k].abs();
                if v > best {
                    best = v;
                    pivot = i;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return None;
            }
            if pivot != k {
                for j in 0..dim {
                    a.swap(k * dim + j, pivot * dim + j);
                }
                perm.swap(k, pivot);
            }
            let inv = 1.0 / a[k * dim + k];
            for i in k + 1..dim {
                let factor = a[i * dim + k] * inv;
                if factor == 0.0 {
                    continue;
                }
                a[i * dim + k] = factor;
                let (upper, lower) = a.split_at_mut(i * dim);
                let pivot_row = &upper[k * dim + k + 1..k * dim + dim];
                let row = &mut lower[k + 1..dim];
                for (x, p) in row.iter_mut().zip(pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        Some(Lu { dim, lu: a, perm })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..i * n + n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, y)| u * y).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }
}

/// Solves `a x = b` and applies one step of iterative refinement.
pub(crate) fn solve_refined(a: &[f64], dim: usize, b: &[f64]) -> Option<Vec<f64>> {
    let lu = Lu::factor(a.to_vec(), dim)?;
    let mut x = lu.solve(b);
    let r = residual(a, dim, &x, b);
    let dx = lu.solve(&r);
    for (xi, d) in x.iter_mut().zip(&dx) {
        *xi += d;
    }
    Some(x)
}

/// `b - a x`.
pub(crate) fn residual(a: &[f64], dim: usize, x: &[f64], b: &[f64]) -> Vec<f64> {
    (0..dim)
        .map(|i| {
            let row = &a[i * dim..(i + 1) * dim];
            b[i] - row.iter().zip(x).map(|(aij, xj)| aij * xj).sum::<f64>()
        })
        .collect()
}
