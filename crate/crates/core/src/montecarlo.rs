//! Trajectory sampling.
//!
//! Every trial owns a ChaCha8 stream selected by `(seed, trial index)`, so a
//! batch of trials gives the same counts however it is split across workers.

use alloc::vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::MicSmpModel;
use crate::error::{Error, Result};
use crate::exact::InitialDistribution;
use crate::graph::Configuration;

pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

/// Normal-approximation multiplier for [`SimulationResult::ci_halfwidth`].
pub const CI_Z: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimulationMode {
    /// Every step, idle ones included, is simulated and counted.
    Faithful,
    /// Only state-changing steps are sampled, renormalised by `1 - idle`.
    /// Absorption probabilities are unchanged.
    #[default]
    EventDriven,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryConfig {
    pub seed: u64,
    pub max_steps: u64,
    pub mode: SimulationMode,
}

impl TrajectoryConfig {
    pub fn new(seed: u64) -> Self {
        TrajectoryConfig {
            seed,
            max_steps: DEFAULT_MAX_STEPS,
            mode: SimulationMode::EventDriven,
        }
    }

    pub fn with_mode(mut self, mode: SimulationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "max_steps",
                value: 0.0,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Fixation {
        steps: u64,
    },
    Extinction {
        steps: u64,
    },
    /// `max_steps` reached before absorption.
    Censored {
        steps: u64,
    },
}

/// Random stream for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs one trajectory from `x0` using the stream of trial 0.
pub fn simulate_trajectory(model: &MicSmpModel, x0: Configuration, cfg: &TrajectoryConfig) -> Result<Outcome> {
    cfg.validate()?;
    let mut rng = trial_rng(cfg.seed, 0);
    simulate_with_rng(model, x0, cfg.mode, cfg.max_steps, &mut rng)
}

pub fn simulate_with_rng<R: Rng + ?Sized>(
    model: &MicSmpModel,
    x0: Configuration,
    mode: SimulationMode,
    max_steps: u64,
    rng: &mut R,
) -> Result<Outcome> {
    if x0.n() != model.n() {
        return Err(Error::DimensionMismatch {
            expected: model.n(),
            found: x0.n(),
        });
    }
    if x0.is_absorbing() {
        return Err(Error::AbsorbingStart { mask: x0.bits() });
    }
    let n = model.n();
    let mut masses = vec![0.0; n];
    let mut x = x0;
    let mut steps = 0;
    while steps < max_steps {
        steps += 1;
        model.flip_masses(x, &mut masses);
        let moving: f64 = masses.iter().sum();
        let u: f64 = rng.gen();
        let target = match mode {
            SimulationMode::Faithful => u,
            SimulationMode::EventDriven => u * moving,
        };
        if mode == SimulationMode::Faithful && target >= moving {
            // idle step
            continue;
        }
        let mut acc = 0.0;
        let mut chosen = None;
        for (v, m) in masses.iter().enumerate() {
            if *m > 0.0 {
                acc += m;
                chosen = Some(v);
                if target < acc {
                    break;
                }
            }
        }
        // chosen is None only if nothing can move, impossible on a strongly
        // connected graph with a transient state
        let Some(v) = chosen else {
            return Err(Error::NumericalFailure("no transition available".into()));
        };
        x = x.flipped(v);
        if x.bits() == 0 {
            return Ok(Outcome::Extinction { steps });
        }
        if x.is_absorbing() {
            return Ok(Outcome::Fixation { steps });
        }
    }
    Ok(Outcome::Censored { steps })
}

/// Integer tallies of a batch of trials. Merging is associative and
/// commutative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialCounts {
    pub trials: u64,
    pub fixations: u64,
    pub extinctions: u64,
    pub censored: u64,
}

impl TrialCounts {
    pub fn merge(self, other: TrialCounts) -> TrialCounts {
        TrialCounts {
            trials: self.trials + other.trials,
            fixations: self.fixations + other.fixations,
            extinctions: self.extinctions + other.extinctions,
            censored: self.censored + other.censored,
        }
    }

    fn record(&mut self, outcome: Outcome) {
        self.trials += 1;
        match outcome {
            Outcome::Fixation { .. } => self.fixations += 1,
            Outcome::Extinction { .. } => self.extinctions += 1,
            Outcome::Censored { .. } => self.censored += 1,
        }
    }
}

/// Runs the trials with indices in `range`. Trial `k` draws its start from
/// `alpha` and then its trajectory, both from `trial_rng(cfg.seed, k)`.
pub fn run_trials(
    model: &MicSmpModel,
    alpha: &InitialDistribution,
    range: Range<u64>,
    cfg: &TrajectoryConfig,
) -> Result<TrialCounts> {
    cfg.validate()?;
    if alpha.n() != model.n() {
        return Err(Error::DimensionMismatch {
            expected: model.n(),
            found: alpha.n(),
        });
    }
    let mut counts = TrialCounts::default();
    for k in range {
        let mut rng = trial_rng(cfg.seed, k);
        let x0 = alpha.sample(rng.gen());
        counts.record(simulate_with_rng(model, x0, cfg.mode, cfg.max_steps, &mut rng)?);
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationResult {
    pub trials: u64,
    pub fixations: u64,
    pub extinctions: u64,
    pub censored: u64,
    /// `fixations / (trials - censored)`; NaN if every trial was censored.
    pub frequency: f64,
    /// `3 * sqrt(f (1 - f) / (trials - censored))`.
    pub ci_halfwidth: f64,
    pub seed: u64,
}

impl SimulationResult {
    pub fn from_counts(counts: TrialCounts, seed: u64) -> Self {
        let decided = counts.trials - counts.censored;
        let (frequency, ci_halfwidth) = if decided == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let f = counts.fixations as f64 / decided as f64;
            (f, CI_Z * libm::sqrt(f * (1.0 - f) / decided as f64))
        };
        SimulationResult {
            trials: counts.trials,
            fixations: counts.fixations,
            extinctions: counts.extinctions,
            censored: counts.censored,
            frequency,
            ci_halfwidth,
            seed,
        }
    }
}

/// Sequential estimate of the fixation probability from `alpha`.
pub fn estimate_fixation(
    model: &MicSmpModel,
    alpha: &InitialDistribution,
    trials: u64,
    cfg: &TrajectoryConfig,
) -> Result<SimulationResult> {
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            value: 0.0,
        });
    }
    let counts = run_trials(model, alpha, 0..trials, cfg)?;
    Ok(SimulationResult::from_counts(counts, cfg.seed))
}
