//! Exact fixation probabilities.
//!
//! `rho_x` is the probability of reaching the all-mutant configuration from
//! `x`. On transient states it solves `(I - Q) h = b`, where `Q` is the
//! transient block of the kernel and `b` the one-step mass into the
//! all-mutant state.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::MicSmpModel;
use crate::error::{Error, Result};
use crate::graph::{full_mask, Configuration, LevelIter, DEFAULT_TOLERANCE};
use crate::linalg;

/// Largest `n` accepted by the dense solver.
pub const DENSE_MAX_VERTICES: usize = 12;
/// Largest `n` accepted by the iterative solver.
pub const ITERATIVE_MAX_VERTICES: usize = 20;
/// `Auto` switches from dense to iterative above this `n`.
pub const AUTO_DENSE_MAX_VERTICES: usize = 10;

/// Fixation probability of the classic Moran chain started with `i` of `n`
/// mutants: `i/n` for neutral fitness, `(1 - r^-i) / (1 - r^-n)` otherwise.
pub fn moran_rho(i: usize, n: usize, r: f64) -> f64 {
    if i == 0 {
        return 0.0;
    }
    if i >= n {
        return 1.0;
    }
    if (r - 1.0).abs() <= 1e-12 {
        return i as f64 / n as f64;
    }
    // expm1/log1p keep full precision near r = 1 and avoid overflow of r^-n
    // for small r
    let ln_r = libm::log1p(r - 1.0);
    let (i, n) = (i as f64, n as f64);
    if r > 1.0 {
        libm::expm1(-i * ln_r) / libm::expm1(-n * ln_r)
    } else {
        libm::exp((n - i) * ln_r) * libm::expm1(i * ln_r) / libm::expm1(n * ln_r)
    }
}

/// Probability distribution over transient starting configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDistribution {
    atoms: Vec<(Configuration, f64)>,
}

impl InitialDistribution {
    pub fn new(atoms: Vec<(Configuration, f64)>) -> Result<Self> {
        let Some(first) = atoms.first() else {
            return Err(Error::InvalidInitial("no atoms".into()));
        };
        let n = first.0.n();
        let mut total = 0.0;
        for (x, w) in &atoms {
            if x.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: x.n(),
                });
            }
            if !(*w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidInitial(format!("weight {w} for mask {}", x.bits())));
            }
            if x.is_absorbing() && *w > 0.0 {
                return Err(Error::AtomOnAbsorbing { mask: x.bits() });
            }
            total += w;
        }
        if (total - 1.0).abs() > DEFAULT_TOLERANCE {
            return Err(Error::InvalidInitial(format!("weights sum to {total}")));
        }
        Ok(InitialDistribution { atoms })
    }

    pub fn point(x: Configuration) -> Result<Self> {
        InitialDistribution::new(vec![(x, 1.0)])
    }

    /// Uniform over all configurations with `j` mutants, `0 < j < n`.
    pub fn uniform_level(n: usize, j: usize) -> Result<Self> {
        if j == 0 || j >= n {
            return Err(Error::LevelOutOfRange { n, level: j });
        }
        let configs: Vec<Configuration> = crate::graph::enumerate_level(n, j)?;
        let w = 1.0 / configs.len() as f64;
        InitialDistribution::new(configs.into_iter().map(|x| (x, w)).collect())
    }

    pub fn n(&self) -> usize {
        self.atoms[0].0.n()
    }

    pub fn atoms(&self) -> &[(Configuration, f64)] {
        &self.atoms
    }

    /// Level of the support if every atom with positive weight has the same
    /// number of mutants.
    pub fn common_level(&self) -> Option<usize> {
        let mut levels = self.atoms.iter().filter(|a| a.1 > 0.0).map(|a| a.0.level());
        let first = levels.next()?;
        levels.all(|l| l == first).then_some(first)
    }

    /// Draws an atom given a uniform sample `u` in `[0, 1)`.
    pub fn sample(&self, u: f64) -> Configuration {
        let mut acc = 0.0;
        for (x, w) in &self.atoms {
            acc += w;
            if u < acc {
                return *x;
            }
        }
        // rounding: fall back to the last atom with positive weight
        self.atoms
            .iter()
            .rev()
            .find(|a| a.1 > 0.0)
            .map(|a| a.0)
            .unwrap_or(self.atoms[0].0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    /// Dense for `n <= 10`, iterative above.
    #[default]
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: SolverMethod,
    /// Stop when the largest update of a sweep falls below this.
    pub tolerance: f64,
    pub max_sweeps: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: SolverMethod::Auto,
            tolerance: 1e-12,
            max_sweeps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverKind {
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverInfo {
    pub kind: SolverKind,
    /// Sweeps for the iterative solver, refinement steps for the dense one.
    pub iterations: u64,
    /// `max_x |(I - Q) h - b|` over transient states.
    pub residual: f64,
}

/// Required bound on the linear-system residual.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Fixation probabilities for every configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationReport {
    n: usize,
    fitness: f64,
    rho: Vec<f64>,
    pub rho_alpha: Option<f64>,
    pub solver: SolverInfo,
}

impl FixationReport {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self, x: Configuration) -> f64 {
        self.rho[x.bits() as usize]
    }

    /// `rho` indexed by mask.
    pub fn values(&self) -> &[f64] {
        &self.rho
    }

    pub fn extinction(&self, x: Configuration) -> f64 {
        1.0 - self.rho(x)
    }

    /// `sum_x alpha(x) rho_x`.
    pub fn for_initial(&self, alpha: &InitialDistribution) -> Result<f64> {
        if alpha.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: alpha.n(),
            });
        }
        Ok(alpha.atoms().iter().map(|(x, w)| w * self.rho(*x)).sum())
    }

    /// Classic Moran fixation probability for each transient level.
    pub fn moran_reference(&self) -> BTreeMap<usize, f64> {
        (1..self.n).map(|j| (j, moran_rho(j, self.n, self.fitness))).collect()
    }

    /// For each level `0 < j < n`, the largest `|rho_x - moran_rho(j)|`.
    pub fn per_level_deviation(&self) -> BTreeMap<usize, f64> {
        (1..self.n)
            .map(|j| {
                let reference = moran_rho(j, self.n, self.fitness);
                let dev = LevelIter::new(self.n, j)
                    .map(|x| (self.rho(x) - reference).abs())
                    .fold(0.0, f64::max);
                (j, dev)
            })
            .collect()
    }
}

pub fn fixation_probabilities(model: &MicSmpModel) -> Result<FixationReport> {
    fixation_probabilities_with(model, &SolverOptions::default())
}

pub fn fixation_probabilities_with(model: &MicSmpModel, opts: &SolverOptions) -> Result<FixationReport> {
    let n = model.n();
    let dense = match opts.method {
        SolverMethod::Auto => n <= AUTO_DENSE_MAX_VERTICES,
        SolverMethod::Dense => true,
        SolverMethod::Iterative => false,
    };
    model.weights().ensure_at_most(if dense {
        DENSE_MAX_VERTICES
    } else {
        ITERATIVE_MAX_VERTICES
    })?;
    let system = TransientSystem::build(model);
    let (h, kind, iterations) = if dense {
        (system.solve_dense()?, SolverKind::Dense, 1)
    } else {
        let (h, sweeps) = system.solve_iterative(opts)?;
        (h, SolverKind::Iterative, sweeps)
    };
    let residual = system.residual(&h);
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(Error::NumericalFailure(format!(
            "fixation system residual {residual:e} exceeds {RESIDUAL_TOLERANCE:e}"
        )));
    }
    let mut rho = Vec::with_capacity(1 << n);
    rho.push(0.0);
    rho.extend(h.iter().map(|v| v.clamp(0.0, 1.0)));
    rho.push(1.0);
    Ok(FixationReport {
        n,
        fitness: model.fitness(),
        rho,
        rho_alpha: None,
        solver: SolverInfo {
            kind,
            iterations,
            residual,
        },
    })
}

/// Fixation probability for a starting distribution.
pub fn fixation_for_initial(model: &MicSmpModel, alpha: &InitialDistribution) -> Result<f64> {
    fixation_probabilities(model)?.for_initial(alpha)
}

/// For each level `0 < j < n`, the largest deviation of `rho_x` from the
/// Moran value over configurations with `j` mutants.
pub fn moran_deviation(model: &MicSmpModel) -> Result<BTreeMap<usize, f64>> {
    Ok(fixation_probabilities(model)?.per_level_deviation())
}

/// Threshold for deciding that Moran fixation holds at a level.
pub const MORAN_HOLDS_TOLERANCE: f64 = 1e-9;

// Transient states are masks 1..2^n - 1, stored at index mask - 1.
struct TransientSystem {
    n: usize,
    /// `flips[i * n + u]`: mass from transient state `i` to its `u`-flip.
    flips: Vec<f64>,
    idle: Vec<f64>,
}

impl TransientSystem {
    fn build(model: &MicSmpModel) -> Self {
        let n = model.n();
        let count = (1usize << n) - 2;
        let mut flips = vec![0.0; count * n];
        let mut idle = vec![0.0; count];
        for (i, (chunk, d)) in flips.chunks_exact_mut(n).zip(idle.iter_mut()).enumerate() {
            *d = model.flip_masses(Configuration::from_raw(i as u64 + 1, n), chunk);
        }
        TransientSystem { n, flips, idle }
    }

    fn count(&self) -> usize {
        self.idle.len()
    }

    // (I - Q) h at state i, minus b
    fn row_residual(&self, i: usize, h: &[f64]) -> f64 {
        let full = full_mask(self.n) as usize;
        let x = i + 1;
        let mut acc = (1.0 - self.idle[i]) * h[i];
        for (u, p) in self.flips[i * self.n..(i + 1) * self.n].iter().enumerate() {
            let y = x ^ (1 << u);
            if y == full {
                acc -= p;
            } else if y != 0 {
                acc -= p * h[y - 1];
            }
        }
        acc
    }

    fn residual(&self, h: &[f64]) -> f64 {
        (0..self.count())
            .map(|i| self.row_residual(i, h).abs())
            .fold(0.0, f64::max)
    }

    fn solve_dense(&self) -> Result<Vec<f64>> {
        let dim = self.count();
        let full = full_mask(self.n) as usize;
        let mut a = vec![0.0; dim * dim];
        let mut b = vec![0.0; dim];
        for i in 0..dim {
            let x = i + 1;
            a[i * dim + i] = 1.0 - self.idle[i];
            for (u, p) in self.flips[i * self.n..(i + 1) * self.n].iter().enumerate() {
                let y = x ^ (1 << u);
                if y == full {
                    b[i] += p;
                } else if y != 0 {
                    a[i * dim + y - 1] -= p;
                }
            }
        }
        linalg::solve_refined(&a, dim, &b).ok_or_else(|| Error::NumericalFailure("singular transient system".into()))
    }

    // Gauss-Seidel sweeps in ascending mask order with the self-loop
    // eliminated: h_x <- (sum_{y != x} P(x, y) h_y + b_x) / (1 - P(x, x)).
    fn solve_iterative(&self, opts: &SolverOptions) -> Result<(Vec<f64>, u64)> {
        let dim = self.count();
        let full = full_mask(self.n) as usize;
        let mut h: Vec<f64> = (0..dim).map(|i| (i + 1).count_ones() as f64 / self.n as f64).collect();
        let mut delta = f64::INFINITY;
        for sweep in 1..=opts.max_sweeps {
            delta = 0.0;
            for i in 0..dim {
                let x = i + 1;
                let mut acc = 0.0;
                for (u, p) in self.flips[i * self.n..(i + 1) * self.n].iter().enumerate() {
                    let y = x ^ (1 << u);
                    if y == full {
                        acc += p;
                    } else if y != 0 {
                        acc += p * h[y - 1];
                    }
                }
                let next = acc / (1.0 - self.idle[i]);
                delta = f64::max(delta, (next - h[i]).abs());
                h[i] = next;
            }
            if delta <= opts.tolerance {
                return Ok((h, sweep));
            }
        }
        Err(Error::NoConvergence {
            sweeps: opts.max_sweeps,
            delta,
        })
    }
}
