use alloc::vec::Vec;

use crate::dynamics::{p_minus, p_plus, MicSmpModel};
use crate::error::Result;
use crate::graph::{full_mask, Configuration};

use super::ENUMERATION_MAX_VERTICES;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftEntry {
    pub config: Configuration,
    pub p_plus: f64,
    pub p_minus: f64,
    /// `E[M_{k+1} - M_k | X_k = x] = p+ - p-`.
    pub drift: f64,
    /// `E[r^{-(M_{k+1} - M_k)} | X_k = x] - 1`.
    pub exp_drift: f64,
}

/// Conditional drift of the mutant count and of `r^{-M_k}` at every
/// transient configuration. Both vanish identically under stationary
/// selection (the first only for `r = 1`), which makes `M_k` resp.
/// `r^{-M_k}` martingales.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleReport {
    pub entries: Vec<DriftEntry>,
    pub max_abs_drift: f64,
    pub max_abs_exp_drift: f64,
}

pub fn martingale_report(model: &MicSmpModel) -> Result<MartingaleReport> {
    model.weights().ensure_at_most(ENUMERATION_MAX_VERTICES)?;
    let n = model.n();
    let r = model.fitness();
    let entries: Vec<DriftEntry> = (1..full_mask(n))
        .map(|bits| {
            let x = Configuration::from_raw(bits, n);
            let up = p_plus(x, model);
            let down = p_minus(x, model);
            // r p- + (1 - p+ - p-) + p+/r - 1, with the constants cancelled
            let exp_drift = (r - 1.0) * down + (1.0 / r - 1.0) * up;
            DriftEntry {
                config: x,
                p_plus: up,
                p_minus: down,
                drift: up - down,
                exp_drift,
            }
        })
        .collect();
    let max_abs = |f: fn(&DriftEntry) -> f64| entries.iter().map(|e| f(e).abs()).fold(0.0, f64::max);
    Ok(MartingaleReport {
        max_abs_drift: max_abs(|e| e.drift),
        max_abs_exp_drift: max_abs(|e| e.exp_drift),
        entries,
    })
}
