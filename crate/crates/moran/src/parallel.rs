//! Multi-threaded trial execution.
//!
//! Trials are cut into fixed chunks of [`CHUNK`] indices independent of the
//! worker count; each trial uses its own `(seed, index)` stream and chunk
//! tallies are integers, so the result is identical for any number of
//! threads.

use moran_core::montecarlo::{run_trials, TrialCounts};
use moran_core::{InitialDistribution, MicSmpModel, SimulationResult, TrajectoryConfig};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

pub const CHUNK: u64 = 4096;

/// Environment variable read for the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "MORAN_THREADS";

pub fn estimate_parallel(
    model: &MicSmpModel,
    alpha: &InitialDistribution,
    trials: u64,
    cfg: &TrajectoryConfig,
    threads: Option<usize>,
) -> CliResult<SimulationResult> {
    if trials == 0 {
        return Err(moran_core::Error::InvalidParameter {
            name: "trials",
            value: 0.0,
        }
        .into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    let chunks = trials.div_ceil(CHUNK);
    let counts = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| run_trials(model, alpha, c * CHUNK..((c + 1) * CHUNK).min(trials), cfg))
            .try_reduce(TrialCounts::default, |a, b| Ok(a.merge(b)))
    })?;
    Ok(SimulationResult::from_counts(counts, cfg.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use moran_core::analysis::galanis_model;
    use moran_core::montecarlo::estimate_fixation;
    use moran_core::Configuration;

    #[test]
    fn matches_sequential_for_any_thread_count() {
        let model = galanis_model(1.3).unwrap();
        let alpha = InitialDistribution::point(Configuration::new(0b001, 3).unwrap()).unwrap();
        let cfg = TrajectoryConfig::new(17);
        let reference = estimate_fixation(&model, &alpha, 10_000, &cfg).unwrap();
        for threads in [1, 3, 8] {
            let res = estimate_parallel(&model, &alpha, 10_000, &cfg, Some(threads)).unwrap();
            assert_eq!(res.fixations, reference.fixations);
            assert_eq!(res.frequency.to_bits(), reference.frequency.to_bits());
        }
    }

    #[test]
    fn zero_trials() {
        let model = galanis_model(1.0).unwrap();
        let alpha = InitialDistribution::uniform_level(3, 1).unwrap();
        let err = estimate_parallel(&model, &alpha, 0, &TrajectoryConfig::new(1), None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
