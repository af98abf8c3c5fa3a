use crate::dynamics::{p_minus, p_plus, MicSmpModel};
use crate::error::Result;
use crate::graph::{full_mask, Configuration};

use super::ENUMERATION_MAX_VERTICES;

/// Deviation of `p-/p+` from `1/r` over the transient configurations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    /// `max_x |p-(x)/p+(x) - 1/r|`. Infinite if some `x` has `p+ = 0 < p-`.
    pub max_deviation: f64,
    pub worst: Option<Configuration>,
    /// Same maximum restricted to single-mutant configurations.
    pub single_mutant_deviation: f64,
    pub single_mutant_witness: Option<Configuration>,
}

fn deviation(x: Configuration, model: &MicSmpModel) -> Option<f64> {
    let up = p_plus(x, model);
    let down = p_minus(x, model);
    if up > 0.0 {
        Some((down / up - 1.0 / model.fitness()).abs())
    } else if down > 0.0 {
        Some(f64::INFINITY)
    } else {
        // 0/0: the state is stuck at its level, no ratio defined
        None
    }
}

pub fn ratio_constancy(model: &MicSmpModel) -> Result<RatioReport> {
    model.weights().ensure_at_most(ENUMERATION_MAX_VERTICES)?;
    let n = model.n();
    let mut rep = RatioReport {
        max_deviation: 0.0,
        worst: None,
        single_mutant_deviation: 0.0,
        single_mutant_witness: None,
    };
    for bits in 1..full_mask(n) {
        let x = Configuration::from_raw(bits, n);
        let Some(d) = deviation(x, model) else { continue };
        if rep.worst.is_none() || d > rep.max_deviation {
            rep.max_deviation = d;
            rep.worst = Some(x);
        }
        if x.level() == 1 && (rep.single_mutant_witness.is_none() || d > rep.single_mutant_deviation) {
            rep.single_mutant_deviation = d;
            rep.single_mutant_witness = Some(x);
        }
    }
    Ok(rep)
}

/// `p-(x)/p+(x) - 1/r` predicted from the policy's failure to be stationary:
/// `x (W_mu^T - W_mu) 1^T / (r x W_mu (1 - x)^T)`, where
/// `x W_mu^T 1^T = sum_{v in x} (mu W)_v` and `x W_mu 1^T = sum_{v in x} mu_v`.
pub fn ratio_deviation_term(x: Configuration, model: &MicSmpModel) -> f64 {
    let n = model.n();
    let mu = model.policy().as_slice();
    let inflow = model.weights().left_apply(mu);
    let mut numerator = 0.0;
    let mut cross = 0.0;
    for v in (0..n).filter(|&v| x.is_mutant(v)) {
        numerator += inflow[v] - mu[v];
        let out: f64 = (0..n)
            .filter(|&u| !x.is_mutant(u))
            .map(|u| model.weights().get(v, u))
            .sum();
        cross += mu[v] * out;
    }
    numerator / (model.fitness() * cross)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{galanis_model, n2_model};
    use crate::graph::SelectionPolicy;
    use alloc::vec;

    #[test]
    fn stationary_ratio_is_constant() {
        for r in [0.3, 1.0, 2.0] {
            let rep = ratio_constancy(&galanis_model(r).unwrap()).unwrap();
            assert!(rep.max_deviation <= 1e-12);
        }
    }

    #[test]
    fn uniform_policy_on_galanis_deviates() {
        let m = galanis_model(1.0)
            .unwrap()
            .with_policy(SelectionPolicy::uniform(3))
            .unwrap();
        let rep = ratio_constancy(&m).unwrap();
        assert!(rep.max_deviation > 1e-6);
        assert!(rep.single_mutant_deviation > 1e-6);
        assert_eq!(rep.single_mutant_witness.map(|x| x.level()), Some(1));
    }

    #[test]
    fn two_vertex_stationary_choice() {
        let (w1, w2) = (0.4, 0.9);
        let c = w1 / w2;
        let m = n2_model(w1, w2, 1.0 / (c + 1.0), 2.5).unwrap();
        assert!(ratio_constancy(&m).unwrap().max_deviation <= 1e-12);
    }

    #[test]
    fn deviation_term_matches_direct_ratio() {
        let mu = SelectionPolicy::new(vec![0.5, 0.1, 0.4]).unwrap();
        for r in [0.5, 1.0, 3.0] {
            let m = galanis_model(r).unwrap().with_policy(mu.clone()).unwrap();
            for bits in 1..7 {
                let x = Configuration::new(bits, 3).unwrap();
                let direct = p_minus(x, &m) / p_plus(x, &m) - 1.0 / r;
                assert!((direct - ratio_deviation_term(x, &m)).abs() < 1e-12);
            }
        }
    }
}
