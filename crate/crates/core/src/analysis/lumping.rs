use crate::dynamics::{p_minus, p_plus, MicSmpModel};
use crate::error::Result;
use crate::graph::LevelIter;

use super::{ENUMERATION_MAX_VERTICES, STRUCTURAL_TOLERANCE};
use crate::graph::Configuration;

/// Two configurations on the same level whose increase or decrease
/// probabilities differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LumpWitness {
    pub level: usize,
    pub first: Configuration,
    pub second: Configuration,
    /// `(p+, p-)` at `first`.
    pub first_values: (f64, f64),
    /// `(p+, p-)` at `second`.
    pub second_values: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LumpabilityReport {
    /// `p+` and `p-` are constant on every level, so the mutant count is
    /// itself a birth-death chain.
    pub lumpable: bool,
    pub witness: Option<LumpWitness>,
}

/// Compares every configuration of each transient level against the first
/// one (in mask order) and reports the first mismatch.
pub fn macro_markov_check(model: &MicSmpModel) -> Result<LumpabilityReport> {
    model.weights().ensure_at_most(ENUMERATION_MAX_VERTICES)?;
    let n = model.n();
    for level in 1..n {
        let mut configs = LevelIter::new(n, level);
        let Some(first) = configs.next() else { continue };
        let reference = (p_plus(first, model), p_minus(first, model));
        for x in configs {
            let values = (p_plus(x, model), p_minus(x, model));
            if (values.0 - reference.0).abs() > STRUCTURAL_TOLERANCE
                || (values.1 - reference.1).abs() > STRUCTURAL_TOLERANCE
            {
                return Ok(LumpabilityReport {
                    lumpable: false,
                    witness: Some(LumpWitness {
                        level,
                        first,
                        second: x,
                        first_values: reference,
                        second_values: values,
                    }),
                });
            }
        }
    }
    Ok(LumpabilityReport {
        lumpable: true,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{galanis_model, n2_model};
    use crate::graph::WeightMatrix;

    #[test]
    fn complete_graph_is_lumpable() {
        for n in 2..7 {
            let m = MicSmpModel::uniform(WeightMatrix::complete(n).unwrap(), 1.7).unwrap();
            assert!(macro_markov_check(&m).unwrap().lumpable);
        }
    }

    #[test]
    fn galanis_is_not_lumpable() {
        let rep = macro_markov_check(&galanis_model(1.0).unwrap()).unwrap();
        assert!(!rep.lumpable);
        let w = rep.witness.unwrap();
        assert_eq!(w.level, 1);
        assert_eq!(w.first.bits(), 0b001);
        assert_eq!(w.second.bits(), 0b100);
        assert!((w.first_values.0 - 2.0 / 7.0).abs() < 1e-15);
        assert!((w.second_values.0 - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn two_vertex_generic_is_not_lumpable() {
        assert!(
            !macro_markov_check(&n2_model(0.3, 0.9, 0.25, 1.0).unwrap())
                .unwrap()
                .lumpable
        );
        assert!(
            !macro_markov_check(&n2_model(0.5, 0.5, 0.3, 1.0).unwrap())
                .unwrap()
                .lumpable
        );
        assert!(
            macro_markov_check(&n2_model(0.5, 0.5, 0.5, 2.0).unwrap())
                .unwrap()
                .lumpable
        );
    }
}
