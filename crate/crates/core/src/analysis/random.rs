//! Seeded generators for randomised checks.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{SelectionPolicy, WeightMatrix, DEFAULT_TOLERANCE};

/// Random strongly connected stochastic matrix.
///
/// A random Hamiltonian cycle guarantees strong connectivity; every other
/// off-diagonal edge is present with probability `edge_probability` and each
/// self-loop with probability 1/2. Present entries are drawn from
/// `[0.05, 1)` before row normalisation.
pub fn random_weight_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, edge_probability: f64) -> Result<WeightMatrix> {
    if n < 2 {
        return Err(Error::VertexCount {
            n,
            max: crate::graph::MAX_VERTICES,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut raw = vec![vec![0.0; n]; n];
    for k in 0..n {
        raw[order[k]][order[(k + 1) % n]] = rng.gen_range(0.05..1.0);
    }
    for (v, row) in raw.iter_mut().enumerate() {
        for (u, w) in row.iter_mut().enumerate() {
            if *w > 0.0 {
                continue;
            }
            let p = if u == v { 0.5 } else { edge_probability };
            if rng.gen_bool(p) {
                *w = rng.gen_range(0.05..1.0);
            }
        }
        normalise(row);
    }
    WeightMatrix::from_rows(&raw)
}

/// Random doubly stochastic matrix from alternating row and column
/// normalisation of a positive matrix.
pub fn random_bistochastic<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<WeightMatrix> {
    const MAX_ITERATIONS: usize = 500;
    let mut raw: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(0.05..1.0)).collect())
        .collect();
    let mut column_error = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        for u in 0..n {
            let s: f64 = raw.iter().map(|row| row[u]).sum();
            raw.iter_mut().for_each(|row| row[u] /= s);
        }
        raw.iter_mut().for_each(|row| normalise(row));
        column_error = (0..n)
            .map(|u| (raw.iter().map(|row| row[u]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        if column_error <= 0.1 * DEFAULT_TOLERANCE {
            break;
        }
    }
    let w = WeightMatrix::from_rows(&raw)?;
    if !w.is_isothermal() {
        return Err(Error::NumericalFailure(format!(
            "column normalisation stalled at {column_error:e}"
        )));
    }
    Ok(w)
}

/// Strictly positive policy, entries drawn from `[0.05, 1)` and normalised.
pub fn random_policy<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SelectionPolicy {
    let mut mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    normalise(&mut mu);
    SelectionPolicy::new(mu).expect("normalised positive vector")
}

fn normalise(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|w| *w /= s);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_matrices_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..9 {
            for p in [0.0, 0.3, 1.0] {
                let w = random_weight_matrix(&mut rng, n, p).unwrap();
                assert_eq!(w.n(), n);
                w.stationary_distribution().unwrap();
            }
        }
    }

    #[test]
    fn bistochastic_has_uniform_stationary_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 3..9 {
            let w = random_bistochastic(&mut rng, n).unwrap();
            assert!(w.is_isothermal());
            let pi = w.stationary_distribution().unwrap();
            assert!(pi.as_slice().iter().all(|p| (p - 1.0 / n as f64).abs() < 1e-10));
        }
    }

    #[test]
    fn policies_are_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mu = random_policy(&mut rng, 6);
        assert!(mu.as_slice().iter().all(|m| *m > 0.0));
    }
}
