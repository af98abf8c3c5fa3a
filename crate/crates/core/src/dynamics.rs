//! One-step transition law of the microscopic process.
//!
//! With `zeta = x mu^T` the probability of selecting a mutant, vertex `v` is
//! selected with probability `r mu(v) / (1 + (r - 1) zeta)` if it carries a
//! mutant and `mu(v) / (1 + (r - 1) zeta)` otherwise. The offspring replaces
//! vertex `u` with probability `W(v, u)`. Replacing a vertex of the same type
//! (including `u = v`) leaves the configuration unchanged.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{Configuration, SelectionPolicy, WeightMatrix, DEFAULT_TOLERANCE};

/// Largest `n` for which a full transition kernel is assembled.
pub const KERNEL_MAX_VERTICES: usize = 20;

/// Largest `n` stored as a dense `2^n x 2^n` matrix.
pub const DENSE_KERNEL_MAX_VERTICES: usize = 10;

/// Weight matrix, selection policy and mutant fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct MicSmpModel {
    weights: WeightMatrix,
    policy: SelectionPolicy,
    fitness: f64,
}

impl MicSmpModel {
    pub fn new(weights: WeightMatrix, policy: SelectionPolicy, fitness: f64) -> Result<Self> {
        if policy.len() != weights.n() {
            return Err(Error::DimensionMismatch {
                expected: weights.n(),
                found: policy.len(),
            });
        }
        if !(fitness > 0.0 && fitness.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "r",
                value: fitness,
            });
        }
        Ok(MicSmpModel {
            weights,
            policy,
            fitness,
        })
    }

    /// Model selecting by the stationary distribution of `weights`.
    pub fn stationary(weights: WeightMatrix, fitness: f64) -> Result<Self> {
        let policy = weights.stationary_distribution()?.to_policy();
        MicSmpModel::new(weights, policy, fitness)
    }

    /// Model with uniform selection.
    pub fn uniform(weights: WeightMatrix, fitness: f64) -> Result<Self> {
        let policy = SelectionPolicy::uniform(weights.n());
        MicSmpModel::new(weights, policy, fitness)
    }

    pub fn with_fitness(&self, fitness: f64) -> Result<Self> {
        MicSmpModel::new(self.weights.clone(), self.policy.clone(), fitness)
    }

    pub fn with_policy(&self, policy: SelectionPolicy) -> Result<Self> {
        MicSmpModel::new(self.weights.clone(), policy, self.fitness)
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    pub fn policy(&self) -> &SelectionPolicy {
        &self.policy
    }

    pub fn fitness(&self) -> f64 {
        self.fitness
    }

    /// True if the policy is stationary for the weights within `1e-12`.
    pub fn is_stationary(&self) -> bool {
        self.weights.stationarity_residual(self.policy.as_slice()) <= DEFAULT_TOLERANCE
    }

    #[inline]
    fn normaliser(&self, x: Configuration) -> f64 {
        1.0 + (self.fitness - 1.0) * zeta(x, &self.policy)
    }

    /// Probability mass of every single-vertex flip out of `x`, written into
    /// `out[u]` for the flip of vertex `u`; returns the idle probability.
    ///
    /// Pairs `(v, u)` are visited in ascending order so the sums are
    /// reproducible.
    pub fn flip_masses(&self, x: Configuration, out: &mut [f64]) -> f64 {
        let n = self.n();
        out[..n].fill(0.0);
        if x.is_absorbing() {
            return 1.0;
        }
        let norm = self.normaliser(x);
        let mut idle = 0.0;
        for v in 0..n {
            let mutant = x.is_mutant(v);
            let s = self.policy.get(v) * if mutant { self.fitness } else { 1.0 } / norm;
            if s == 0.0 {
                continue;
            }
            for (u, w) in self.weights.row(v).iter().enumerate() {
                let p = s * w;
                if x.is_mutant(u) == mutant {
                    idle += p;
                } else {
                    out[u] += p;
                }
            }
        }
        idle
    }
}

/// Probability `x mu^T` of selecting a mutant before fitness weighting.
pub fn zeta(x: Configuration, mu: &SelectionPolicy) -> f64 {
    (0..x.n()).filter(|&v| x.is_mutant(v)).map(|v| mu.get(v)).sum()
}

/// Probability that the number of mutants increases by one:
/// `r / (1 + (r - 1) zeta) * x W_mu (1 - x)^T` with `W_mu = diag(mu) W`.
pub fn p_plus(x: Configuration, model: &MicSmpModel) -> f64 {
    if x.is_absorbing() {
        return 0.0;
    }
    model.fitness * cross_weight(x, model, true) / model.normaliser(x)
}

/// Probability that the number of mutants decreases by one:
/// `1 / (1 + (r - 1) zeta) * (1 - x) W_mu x^T`.
pub fn p_minus(x: Configuration, model: &MicSmpModel) -> f64 {
    if x.is_absorbing() {
        return 0.0;
    }
    cross_weight(x, model, false) / model.normaliser(x)
}

// sum of mu(v) W(v, u) over v of type `from_mutant` and u of the other type
fn cross_weight(x: Configuration, model: &MicSmpModel, from_mutant: bool) -> f64 {
    let n = model.n();
    let mut total = 0.0;
    for v in (0..n).filter(|&v| x.is_mutant(v) == from_mutant) {
        let row = model.weights.row(v);
        let out: f64 = (0..n).filter(|&u| x.is_mutant(u) != from_mutant).map(|u| row[u]).sum();
        total += model.policy.get(v) * out;
    }
    total
}

/// One-step law from a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    pub source: Configuration,
    /// Targets in increasing mask order; each differs from `source` in
    /// exactly one vertex. Zero-probability targets are omitted.
    pub transitions: Vec<(Configuration, f64)>,
    pub idle_probability: f64,
}

impl StepDistribution {
    pub fn total(&self) -> f64 {
        self.idle_probability + self.transitions.iter().map(|t| t.1).sum::<f64>()
    }

    /// Total mass into configurations with one more mutant.
    pub fn increase(&self) -> f64 {
        let level = self.source.level();
        self.transitions
            .iter()
            .filter(|(y, _)| y.level() > level)
            .map(|t| t.1)
            .sum()
    }

    /// Total mass into configurations with one mutant fewer.
    pub fn decrease(&self) -> f64 {
        let level = self.source.level();
        self.transitions
            .iter()
            .filter(|(y, _)| y.level() < level)
            .map(|t| t.1)
            .sum()
    }
}

pub fn step_distribution(x: Configuration, model: &MicSmpModel) -> StepDistribution {
    let n = model.n();
    let mut masses = vec![0.0; n];
    let idle = model.flip_masses(x, &mut masses);
    let mut transitions: Vec<(Configuration, f64)> = masses
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(u, p)| (x.flipped(u), *p))
        .collect();
    transitions.sort_by_key(|t| t.0.bits());
    StepDistribution {
        source: x,
        transitions,
        idle_probability: idle,
    }
}

/// Full `2^n x 2^n` transition matrix indexed by mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    n: usize,
    storage: KernelStorage,
}

#[derive(Debug, Clone, PartialEq)]
enum KernelStorage {
    /// Row-major `2^n x 2^n`.
    Dense(Vec<f64>),
    /// `flips[x * n + u]` is the mass from `x` to `x ^ (1 << u)`;
    /// `idle[x]` the diagonal.
    Sparse { flips: Vec<f64>, idle: Vec<f64> },
}

pub fn transition_kernel(model: &MicSmpModel) -> Result<TransitionKernel> {
    transition_kernel_with_limit(model, KERNEL_MAX_VERTICES)
}

pub fn transition_kernel_with_limit(model: &MicSmpModel, max_vertices: usize) -> Result<TransitionKernel> {
    let n = model.n();
    model.weights().ensure_at_most(max_vertices.min(KERNEL_MAX_VERTICES))?;
    let states = 1usize << n;
    let mut masses = vec![0.0; n];
    let storage = if n <= DENSE_KERNEL_MAX_VERTICES {
        let mut p = vec![0.0; states * states];
        for x in 0..states {
            let cfg = Configuration::from_raw(x as u64, n);
            let idle = model.flip_masses(cfg, &mut masses);
            let row = &mut p[x * states..(x + 1) * states];
            row[x] = idle;
            for (u, m) in masses.iter().enumerate() {
                row[x ^ (1 << u)] = *m;
            }
        }
        KernelStorage::Dense(p)
    } else {
        let mut flips = vec![0.0; states * n];
        let mut idle = vec![0.0; states];
        for (x, (chunk, d)) in flips.chunks_exact_mut(n).zip(idle.iter_mut()).enumerate() {
            *d = model.flip_masses(Configuration::from_raw(x as u64, n), chunk);
        }
        KernelStorage::Sparse { flips, idle }
    };
    Ok(TransitionKernel { n, storage })
}

impl TransitionKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> usize {
        1 << self.n
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, KernelStorage::Dense(_))
    }

    pub fn get(&self, from: u64, to: u64) -> f64 {
        let (x, y) = (from as usize, to as usize);
        match &self.storage {
            KernelStorage::Dense(p) => p[x * self.states() + y],
            KernelStorage::Sparse { flips, idle } => {
                let diff = x ^ y;
                if diff == 0 {
                    idle[x]
                } else if diff.is_power_of_two() {
                    flips[x * self.n + diff.trailing_zeros() as usize]
                } else {
                    0.0
                }
            }
        }
    }

    /// Nonzero entries of row `from`, diagonal included, in increasing
    /// target order.
    pub fn row(&self, from: u64) -> Vec<(u64, f64)> {
        let mut out: Vec<(u64, f64)> = core::iter::once(from)
            .chain((0..self.n).map(|u| from ^ (1 << u)))
            .map(|y| (y, self.get(from, y)))
            .filter(|(_, p)| *p != 0.0)
            .collect();
        out.sort_by_key(|e| e.0);
        out
    }

    /// All nonzero entries as `(from, to, prob)`, sorted by `(from, to)`.
    pub fn entries(&self) -> impl Iterator<Item = (u64, u64, f64)> + '_ {
        (0..self.states() as u64).flat_map(move |x| self.row(x).into_iter().map(move |(y, p)| (x, y, p)))
    }

    /// `(P h)(x)` for a function `h` on masks.
    pub fn apply(&self, h: &[f64], from: u64) -> f64 {
        self.row(from).iter().map(|(y, p)| p * h[*y as usize]).sum()
    }
}
