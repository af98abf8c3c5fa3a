//! Checks of the fixation theory and closed forms for small populations.

mod classic;
mod galanis;
mod lumping;
mod martingale;
pub mod random;
mod ratio;
mod two_vertex;

pub use classic::{classic_moran_check, classic_p_minus, classic_p_plus, ClassicReport};
pub use galanis::{
    galanis_case3_a1, galanis_case_sample, galanis_initial, galanis_model, galanis_moran_condition,
    galanis_neutral_fixation, galanis_policy, galanis_single_mutants, galanis_weights, GalanisCase,
    GalanisClassification, GalanisParams,
};
pub use lumping::{macro_markov_check, LumpWitness, LumpabilityReport};
pub use martingale::{martingale_report, DriftEntry, MartingaleReport};
pub use ratio::{ratio_constancy, ratio_deviation_term, RatioReport};
pub use two_vertex::{
    n2_f, n2_fixation_closed_form, n2_initial, n2_model, n2_moran_selection, n2_weights_for_ratio, sweep_n2, N2Params,
    SweepGrid,
};

/// Tolerance for identities that hold exactly in rational arithmetic.
pub const STRUCTURAL_TOLERANCE: f64 = 1e-12;
/// Tolerance for comparisons that go through a linear solve.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

/// Largest `n` for checks that enumerate every configuration.
pub const ENUMERATION_MAX_VERTICES: usize = 20;
