use crate::dynamics::{p_minus, p_plus, MicSmpModel};
use crate::error::{Error, Result};
use crate::exact::{fixation_probabilities, moran_rho};
use crate::graph::{full_mask, Configuration, WeightMatrix};

/// Classic Moran increase probability `r (j/n) ((n-j)/n) / (1 + (r-1) j/n)`,
/// zero at the absorbing levels.
pub fn classic_p_plus(j: usize, n: usize, r: f64) -> f64 {
    if j == 0 || j >= n {
        return 0.0;
    }
    let z = j as f64 / n as f64;
    r * z * (1.0 - z) / (1.0 + (r - 1.0) * z)
}

/// Classic Moran decrease probability `(j/n) ((n-j)/n) / (1 + (r-1) j/n)`.
pub fn classic_p_minus(j: usize, n: usize, r: f64) -> f64 {
    if j == 0 || j >= n {
        return 0.0;
    }
    let z = j as f64 / n as f64;
    z * (1.0 - z) / (1.0 + (r - 1.0) * z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicReport {
    /// Largest `|p+(x) - p+(j)|` or `|p-(x) - p-(j)|` over all `x`.
    pub max_transition_deviation: f64,
    /// Largest `|rho_x - moran_rho(1, n, r)|` over single-mutant `x`.
    pub max_fixation_deviation: f64,
}

/// Complete graph with loops (`W = 1/n` everywhere) and uniform selection
/// against the classic one-dimensional chain.
pub fn classic_moran_check(n: usize, r: f64) -> Result<ClassicReport> {
    if !(2..=12).contains(&n) {
        return Err(Error::VertexCount { n, max: 12 });
    }
    let model = MicSmpModel::uniform(WeightMatrix::complete(n)?, r)?;
    let mut max_transition_deviation: f64 = 0.0;
    for bits in 0..=full_mask(n) {
        let x = Configuration::from_raw(bits, n);
        let j = x.level();
        max_transition_deviation = max_transition_deviation
            .max((p_plus(x, &model) - classic_p_plus(j, n, r)).abs())
            .max((p_minus(x, &model) - classic_p_minus(j, n, r)).abs());
    }
    let rho = fixation_probabilities(&model)?;
    let reference = moran_rho(1, n, r);
    let max_fixation_deviation = (0..n)
        .map(|v| (rho.rho(Configuration::from_raw(1 << v, n)) - reference).abs())
        .fold(0.0, f64::max);
    Ok(ClassicReport {
        max_transition_deviation,
        max_fixation_deviation,
    })
}
