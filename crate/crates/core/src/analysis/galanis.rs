//! The three-vertex graph
//! `W = [[0, 1/4, 3/4], [1/4, 0, 3/4], [1/2, 1/2, 0]]` with stationary
//! distribution `(2/7, 2/7, 3/7)`, under neutral fitness and an arbitrary
//! policy `(m1, m2, 1 - m1 - m2)`.
//!
//! Single-mutant starting weights follow the row order of the transition
//! table for three vertices: `a1` on a mutant at vertex 2, `a2` on vertex 3,
//! `a3 = 1 - a1 - a2` on vertex 1. The closed-form fixation probability is
//! stated in that order.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::dynamics::MicSmpModel;
use crate::error::{Error, Result};
use crate::exact::InitialDistribution;
use crate::graph::{Configuration, SelectionPolicy, WeightMatrix};

pub fn galanis_weights() -> WeightMatrix {
    WeightMatrix::from_rows(&[vec![0.0, 0.25, 0.75], vec![0.25, 0.0, 0.75], vec![0.5, 0.5, 0.0]])
        .expect("galanis matrix is valid")
}

/// Galanis graph with stationary selection.
pub fn galanis_model(r: f64) -> Result<MicSmpModel> {
    MicSmpModel::stationary(galanis_weights(), r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GalanisParams {
    pub a1: f64,
    pub a2: f64,
    pub m1: f64,
    pub m2: f64,
}

impl GalanisParams {
    pub fn new(a1: f64, a2: f64, m1: f64, m2: f64) -> Result<Self> {
        let g = GalanisParams { a1, a2, m1, m2 };
        for (name, v) in [("a1", a1), ("a2", a2), ("m1", m1), ("m2", m2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter { name, value: v });
            }
        }
        if a1 + a2 > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter {
                name: "a1 + a2",
                value: a1 + a2,
            });
        }
        if m1 + m2 > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter {
                name: "m1 + m2",
                value: m1 + m2,
            });
        }
        Ok(g)
    }
}

pub fn galanis_policy(g: &GalanisParams) -> Result<SelectionPolicy> {
    SelectionPolicy::new(vec![g.m1, g.m2, (1.0 - g.m1 - g.m2).max(0.0)])
}

pub fn galanis_initial(g: &GalanisParams) -> Result<InitialDistribution> {
    InitialDistribution::new(vec![
        (Configuration::new(0b010, 3)?, g.a1),
        (Configuration::new(0b100, 3)?, g.a2),
        (Configuration::new(0b001, 3)?, (1.0 - g.a1 - g.a2).max(0.0)),
    ])
}

/// Fixation probability under `r = 1`:
/// `(2a2 + 3m1 - 3a1m1 + 3a1m2 - 5a2m1 - 2a2m2) / (m1 + m2 + 2)`.
pub fn galanis_neutral_fixation(g: &GalanisParams) -> f64 {
    let GalanisParams { a1, a2, m1, m2 } = *g;
    (2.0 * a2 + 3.0 * m1 - 3.0 * a1 * m1 + 3.0 * a1 * m2 - 5.0 * a2 * m1 - 2.0 * a2 * m2) / (m1 + m2 + 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GalanisCase {
    /// `a1 = a2 = 1/3`, any policy.
    Case1,
    /// `m1 = 2/7`, `a1 != 1/3`, `a2 = (9 a1 - 1)/6`.
    Case2,
    /// `m1 != m2` and the implicit relation between `a1`, `a2`, `m1`, `m2`
    /// holds.
    Case3,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GalanisClassification {
    pub case: GalanisCase,
    /// Closed-form fixation probability minus `1/3`.
    pub fixation_gap: f64,
    /// Residual of the implicit relation; absent when `m1 = m2`.
    pub implicit_residual: Option<f64>,
}

const EQ: f64 = 1e-10;
const DISTINCT_POLICY: f64 = 1e-9;

fn implicit_residual(g: &GalanisParams) -> Option<f64> {
    let d = g.m1 - g.m2;
    (d.abs() > DISTINCT_POLICY)
        .then(|| -g.a1 + g.a2 * (2.0 - 5.0 * g.m1 - 2.0 * g.m2) / (3.0 * d) + (8.0 * g.m1 - g.m2 - 2.0) / (9.0 * d))
}

pub fn galanis_moran_condition(g: &GalanisParams) -> GalanisClassification {
    let third = 1.0 / 3.0;
    let implicit = implicit_residual(g);
    let case = if (g.a1 - third).abs() <= EQ && (g.a2 - third).abs() <= EQ {
        GalanisCase::Case1
    } else if (g.m1 - 2.0 / 7.0).abs() <= EQ
        && (g.a1 - third).abs() > EQ
        && (g.a2 - (9.0 * g.a1 - 1.0) / 6.0).abs() <= EQ
    {
        GalanisCase::Case2
    } else if implicit.is_some_and(|r| r.abs() <= EQ) {
        GalanisCase::Case3
    } else {
        GalanisCase::None
    };
    GalanisClassification {
        case,
        fixation_gap: galanis_neutral_fixation(g) - third,
        implicit_residual: implicit,
    }
}

/// Solves the implicit relation for `a1` given `a2`, `m1 != m2`.
pub fn galanis_case3_a1(a2: f64, m1: f64, m2: f64) -> Option<f64> {
    let d = m1 - m2;
    (d.abs() > DISTINCT_POLICY)
        .then(|| a2 * (2.0 - 5.0 * m1 - 2.0 * m2) / (3.0 * d) + (8.0 * m1 - m2 - 2.0) / (9.0 * d))
}

/// Single-mutant configurations in the order used by [`GalanisParams`].
pub fn galanis_single_mutants() -> Vec<Configuration> {
    [0b010, 0b100, 0b001]
        .into_iter()
        .map(|b| Configuration::new(b, 3).expect("valid mask"))
        .collect()
}

/// Random parameters satisfying the given case; `None` for
/// [`GalanisCase::None`]. Case 3 draws `(a2, m1, m2)` with `|m1 - m2| >= 0.05`
/// until the root `a1` is admissible.
pub fn galanis_case_sample<R: Rng + ?Sized>(rng: &mut R, case: GalanisCase) -> Option<GalanisParams> {
    let policy = |rng: &mut R| {
        let m1: f64 = rng.gen_range(0.0..1.0);
        (m1, rng.gen_range(0.0..=1.0 - m1))
    };
    let third = 1.0 / 3.0;
    match case {
        GalanisCase::Case1 => {
            let (m1, m2) = policy(rng);
            GalanisParams::new(third, third, m1, m2).ok()
        }
        GalanisCase::Case2 => loop {
            // a2 = (9 a1 - 1)/6 in [0, 1] and a1 + a2 <= 1 force a1 in [1/9, 7/15]
            let a1 = rng.gen_range(1.0 / 9.0..=7.0 / 15.0);
            if (a1 - third).abs() <= 1e-3 {
                continue;
            }
            let m2 = rng.gen_range(0.0..=5.0 / 7.0);
            return GalanisParams::new(a1, (9.0 * a1 - 1.0) / 6.0, 2.0 / 7.0, m2).ok();
        },
        GalanisCase::Case3 => loop {
            let (m1, m2) = policy(rng);
            if (m1 - m2).abs() < 0.05 {
                continue;
            }
            let a2 = rng.gen_range(0.0..=1.0);
            let a1 = galanis_case3_a1(a2, m1, m2)?;
            if let Ok(g) = GalanisParams::new(a1, a2, m1, m2) {
                return Some(g);
            }
        },
        GalanisCase::None => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::p_plus;
    use crate::exact::fixation_for_initial;

    #[test]
    fn stationary_distribution() {
        let pi = galanis_weights().stationary_distribution().unwrap();
        for (p, e) in pi.as_slice().iter().zip([2.0 / 7.0, 2.0 / 7.0, 3.0 / 7.0]) {
            assert!((p - e).abs() < 1e-12);
        }
        assert!(!galanis_weights().is_isothermal());
    }

    #[test]
    fn vertices_one_and_two_are_interchangeable() {
        let m = galanis_model(1.7).unwrap();
        let swap = |b: u64| (b & 0b100) | ((b & 1) << 1) | ((b >> 1) & 1);
        for b in 1..7u64 {
            let x = Configuration::new(b, 3).unwrap();
            let y = Configuration::new(swap(b), 3).unwrap();
            assert!((p_plus(x, &m) - p_plus(y, &m)).abs() < 1e-15);
        }
    }

    #[test]
    fn case_examples() {
        let third = 1.0 / 3.0;
        let g = GalanisParams::new(third, third, 0.9, 0.05).unwrap();
        assert_eq!(galanis_moran_condition(&g).case, GalanisCase::Case1);
        assert!((galanis_neutral_fixation(&g) - third).abs() < 1e-15);

        let g = GalanisParams::new(1.0 / 9.0, 0.0, 2.0 / 7.0, 0.5).unwrap();
        let cls = galanis_moran_condition(&g);
        assert_eq!(cls.case, GalanisCase::Case2);
        assert!(cls.fixation_gap.abs() < 1e-15);

        let (a2, m1, m2) = (0.3, 0.1, 0.4);
        let a1 = galanis_case3_a1(a2, m1, m2).unwrap();
        let g = GalanisParams::new(a1, a2, m1, m2).unwrap();
        assert_eq!(galanis_moran_condition(&g).case, GalanisCase::Case3);
        assert!((galanis_neutral_fixation(&g) - third).abs() < 1e-12);

        let g = GalanisParams::new(0.1, 0.1, 0.3, 0.3).unwrap();
        let cls = galanis_moran_condition(&g);
        assert_eq!(cls.case, GalanisCase::None);
        assert!(cls.implicit_residual.is_none());
        assert!(cls.fixation_gap.abs() > 1e-6);
    }

    #[test]
    fn closed_form_matches_exact_solver() {
        let draws = [
            (0.2, 0.5, 0.1, 0.6),
            (0.0, 1.0, 0.5, 0.5),
            (0.7, 0.1, 0.0, 0.0),
            (0.25, 0.25, 1.0, 0.0),
            (0.6, 0.3, 0.2, 0.3),
        ];
        for (a1, a2, m1, m2) in draws {
            let g = GalanisParams::new(a1, a2, m1, m2).unwrap();
            let model = MicSmpModel::new(galanis_weights(), galanis_policy(&g).unwrap(), 1.0).unwrap();
            let exact = fixation_for_initial(&model, &galanis_initial(&g).unwrap()).unwrap();
            assert!((exact - galanis_neutral_fixation(&g)).abs() < 1e-10, "{g:?}");
        }
    }

    #[test]
    fn sampled_cases_classify_and_hit_one_third() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for case in [GalanisCase::Case1, GalanisCase::Case2, GalanisCase::Case3] {
            for _ in 0..20 {
                let g = galanis_case_sample(&mut rng, case).unwrap();
                let cls = galanis_moran_condition(&g);
                assert_eq!(cls.case, case, "{g:?}");
                assert!(cls.fixation_gap.abs() < 1e-12);
            }
        }
        assert!(galanis_case_sample(&mut rng, GalanisCase::None).is_none());
    }

    #[test]
    fn params_validation() {
        assert!(GalanisParams::new(0.7, 0.7, 0.1, 0.1).is_err());
        assert!(GalanisParams::new(0.1, 0.1, 0.7, 0.7).is_err());
        assert!(GalanisParams::new(-0.1, 0.1, 0.1, 0.1).is_err());
        assert!(galanis_case3_a1(0.2, 0.3, 0.3).is_none());
    }
}
