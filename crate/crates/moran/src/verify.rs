//! Verification suites behind `moran verify`.
//!
//! The builtin suite asserts the fixation theory on seeded random families
//! and on the closed-form models; the model suite only describes a user
//! model (a property that fails to hold is reported, not treated as an
//! error).

use std::collections::BTreeMap;

use moran_core::analysis::random::{random_bistochastic, random_policy, random_weight_matrix};
use moran_core::analysis::{
    classic_moran_check, galanis_case_sample, galanis_initial, galanis_model, galanis_neutral_fixation, galanis_policy,
    galanis_weights, macro_markov_check, martingale_report, n2_f, n2_fixation_closed_form, n2_initial, n2_model,
    n2_moran_selection, n2_weights_for_ratio, ratio_constancy, GalanisCase, GalanisParams, LumpabilityReport, N2Params,
    SOLVER_TOLERANCE, STRUCTURAL_TOLERANCE,
};
use moran_core::exact::{fixation_for_initial, fixation_probabilities, moran_rho, MORAN_HOLDS_TOLERANCE};
use moran_core::graph::LevelIter;
use moran_core::montecarlo::trial_rng;
use moran_core::{MicSmpModel, WeightMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::CliResult;
use crate::report::CheckResult;

pub type Checks = BTreeMap<String, CheckResult>;

const FITNESSES: [f64; 3] = [0.5, 1.0, 2.0];

/// Running maximum with the witness of the largest value seen.
struct Worst {
    value: f64,
    witness: Option<Value>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            witness: None,
        }
    }

    fn see(&mut self, value: f64, witness: impl FnOnce() -> Value) {
        if value > self.value || self.witness.is_none() {
            self.value = value;
            self.witness = Some(witness());
        }
    }

    fn within(self, tolerance: f64) -> CheckResult {
        CheckResult {
            pass: self.value <= tolerance,
            max_deviation: self.value,
            witness: self.witness,
        }
    }
}

fn n_for(k: usize) -> usize {
    3 + k % 6
}

/// `max_x |rho_x - moran_rho(level x)|` with the worst mask.
fn moran_gap(model: &MicSmpModel) -> CliResult<(f64, u64)> {
    let rho = fixation_probabilities(model)?;
    let n = model.n();
    let mut worst = (0.0, 0);
    for j in 1..n {
        let reference = moran_rho(j, n, model.fitness());
        for x in LevelIter::new(n, j) {
            let d = (rho.rho(x) - reference).abs();
            if d > worst.0 {
                worst = (d, x.bits());
            }
        }
    }
    Ok(worst)
}

fn rng(seed: u64, check: u64) -> ChaCha8Rng {
    trial_rng(seed, check)
}

pub fn builtin_suite(seed: u64) -> CliResult<Checks> {
    let mut checks = Checks::new();
    let mut put = |name: &str, c: CheckResult| checks.insert(name.to_string(), c);
    put("stochasticity", stochasticity(&mut rng(seed, 0))?);
    put("galanis_stationary", galanis_stationary()?);
    put("stationary_selection", stationary_selection(&mut rng(seed, 1))?);
    put("isothermal", isothermal(&mut rng(seed, 2))?);
    put("martingale", martingale(&mut rng(seed, 3))?);
    put("ratio_stationary", ratio_stationary(&mut rng(seed, 4))?);
    put("ratio_nonstationary", ratio_nonstationary(&mut rng(seed, 5))?);
    put("macro_markov", macro_markov()?);
    put("classic_moran", classic()?);
    put("n2_closed_form", n2_closed_form()?);
    put("n2_moran_selection", n2_selection(&mut rng(seed, 6))?);
    put("n2_symmetries", n2_symmetries()?);
    put("galanis_closed_form", galanis_closed_form(&mut rng(seed, 7))?);
    put("galanis_cases", galanis_cases(&mut rng(seed, 8))?);
    Ok(checks)
}

fn stochasticity(rng: &mut ChaCha8Rng) -> CliResult<CheckResult> {
    let mut fixed = vec![
        ("galanis".to_string(), galanis_weights()),
        ("complete:4".to_string(), WeightMatrix::complete(4)?),
        ("n2:0.3,0.9".to_string(), WeightMatrix::two_vertex(0.3, 0.9)?),
    ];
    for k in 0..8 {
        fixed.push((format!("random:{k}"), random_weight_matrix(rng, 2 + k % 7, 0.4)?));
    }
    let mut worst = Worst::new();
    for (name, w) in fixed {
        let pi = w.stationary_distribution()?;
        worst.see(w.stationarity_residual(pi.as_slice()), || json!({ "model": name }));
    }
    Ok(worst.within(STRUCTURAL_TOLERANCE))
}

fn galanis_stationary() -> CliResult<CheckResult> {
    let pi = galanis_weights().stationary_distribution()?;
    let mut worst = Worst::new();
    for (v, (p, e)) in pi.as_slice().iter().zip([2.0 / 7.0, 2.0 / 7.0, 3.0 / 7.0]).enumerate() {
        worst.see((p - e).abs(), || json!({ "vertex": v + 1 }));
    }
    Ok(worst.within(STRUCTURAL_TOLERANCE))
}

fn stationary_selection(rng: &mut ChaCha8Rng) -> CliResult<CheckResult> {
    let mut worst = Worst::new();
    for k in 0..12 {
        let n = n_for(k);
        let w = random_weight_matrix(rng, n, 0.4)?;
        for r in FITNESSES {
            let (d, mask) = moran_gap(&MicSmpModel::stationary(w.clone(), r)?)?;
            worst.see(d, || json!({ "model": k, "n": n, "r": r, "mask": mask }));
        }
    }
    Ok(worst.within(MORAN_HOLDS_TOLERANCE))
}

fn isothermal(rng: &mut ChaCha8Rng) -> CliResult<CheckResult> {
    let mut worst = Worst::new();
    for k in 0..6 {
        let n = n_for(k);
        let w = random_bistochastic(rng, n)?;
        for r in FITNESSES {
            let (d, mask) = moran_gap(&MicSmpModel::uniform(w.clone(), r)?)?;
            worst.see(d, || json!({ "model": k, "n": n, "r": r, "mask": mask }));
        }
    }
    Ok(worst.within(MORAN_HOLDS_TOLERANCE))
}

fn martingale(rng: &mut ChaCha8Rng) -> CliResult<CheckResult> {
    let mut worst = Worst::new();
    for k in 0..8 {
        let base = MicSmpModel::stationary(random_weight_matrix(rng, n_for(k), 0.4)?, 1.0)?;
        let neutral = martingale_report(&base)?;
        worst.see(
            neutral.max_abs_drift,
            || json!({ "model": k, "r": 1.0, "quantity": "drift" }),
        );
        for r in [0.25, 0.5, 2.0, 4.0] {
            let rep = martingale_report(&base.with_fitness(r)?)?;
            worst.see(
                rep.max_abs_exp_drift,
                || json!({ "model": k, "r": r, "quantity": "exp_drift" }),
            );
        }
    }
    Ok(worst.within(STRUCTURAL_TOLERANCE))
}

fn ratio_stationary(rng: &mut ChaCha8Rng) -> CliResult<CheckResult> {
    let mut worst = Worst::new();
    for k in 0..8 {
        let w = random_weight_matrix(rng, n_for(k), 0.4)?;
        for r in FITNESSES {
            let rep = ratio_constancy(&MicSmpModel::stationary(w.clone(), r)?)?;
            worst.see(
                rep.max_deviation,
                || json!({ "model": k, "r": r, "mask": rep.worst.map(|x| x.bits()) }),
            );
        }
    }
    Ok(worst.within(STRUCTURAL_TOLERANCE))
}

/// Non-stationary policies: every model must show a single-mutant ratio
/// deviation above `1e-9`. `max_deviation` is the smallest such deviation.
fn ratio_nonstationary(rng: &mut ChaCha8Rng) -> CliResult<CheckResult> {
    let mut smallest = f64::INFINITY;
    let mut witness = None;
    let mut pass = true;
    for k in 0..8 {
        let n = n_for(k);
        let w = random_weight_matrix(rng, n, 0.4)?;
        let mu = loop {
            let mu = random_policy(rng, n);
            if w.stationarity_residual(mu.as_slice()) > 1e-3 {
                break mu;
            }
        };
        let rep = ratio_constancy(&MicSmpModel::new(w, mu, 1.5)?)?;
        pass &= rep.single_mutant_witness.is_some() && rep.single_mutant_deviation > 1e-9;
        if rep.single_mutant_deviation < smallest {
            smallest = rep.single_mutant_deviation;
            witness = Some(json!({ "model": k, "mask": rep.single_mutant_witness.map(|x| x.bits()) }));
        }
    }
    Ok(CheckResult {
        pass,
        max_deviation: smallest,
        witness,
    })
}

fn lump_witness(rep: &LumpabilityReport) -> (f64, Option<Value>) {
    match rep.witness {
        Some(w) => (
            (w.first_values.0 - w.second_values.0)
                .abs()
                .max((w.first_values.1 - w.second_values.1).abs()),
            Some(json!({
                "level": w.level,
                "first": w.first.bits(),
                "second": w.second.bits(),
                "first_p_plus_minus": [w.first_values.0, w.first_values.1],
                "second_p_plus_minus": [w.second_values.0, w.second_values.1],
            })),
        ),
        None => (0.0, None),
    }
}

/// Galanis must fail with a level-1 witness; complete graphs must pass.
fn macro_markov() -> CliResult<CheckResult> {
    let galanis = macro_markov_check(&galanis_model(1.0)?)?;
    let mut pass = !galanis.lumpable && galanis.witness.is_some_and(|w| w.level == 1);
    for n in 2..=8 {
        for r in FITNESSES {
            let model = MicSmpModel::uniform(WeightMatrix::complete(n)?, r)?;
            pass &= macro_markov_check(&model)?.lumpable;
        }
    }
    let (gap, witness) = lump_witness(&galanis);
    Ok(CheckResult {
        pass,
        max_deviation: gap,
        witness,
    })
}

fn classic() -> CliResult<CheckResult> {
    let mut transitions = Worst::new();
    let mut fixation: f64 = 0.0;
    for n in 2..=8 {
        for r in FITNESSES {
            let rep = classic_moran_check(n, r)?;
            transitions.see(rep.max_transition_deviation, || json!({ "n": n, "r": r }));
            fixation = fixation.max(rep.max_fixation_deviation);
        }
    }
    let mut res = transitions.within(STRUCTURAL_TOLERANCE);
    res.pass &= fixation <= MORAN_HOLDS_TOLERANCE;
    Ok(res)
}

fn grid(k: usize, size: usize) -> f64 {
    k as f64 / (size - 1) as f64
}

fn n2_closed_form() -> CliResult<CheckResult> {
    let mut worst = Worst::new();
    for c in FITNESSES {
        let (w1, w2) = n2_weights_for_ratio(c)?;
        for r in FITNESSES {
            for j in 0..11 {
                let m = grid(j, 11);
                let model = n2_model(w1, w2, m, r)?;
                let rho = fixation_probabilities(&model)?;
                for i in 0..11 {
                    let a = grid(i, 11);
                    let exact = rho.for_initial(&n2_initial(a)?)?;
                    let closed = n2_fixation_closed_form(&N2Params::new(a, m, c, r)?)?;
                    worst.see((exact - closed).abs(), || json!({ "a": a, "m": m, "c": c, "r": r }));
                }
            }
        }
    }
    Ok(worst.within(STRUCTURAL_TOLERANCE))
}

/// Stationary selection gives the Moran value for every `a`; the solved `m`
/// gives `F = 1` for random admissible `(a, c, r)`.
fn n2_selection(rng: &mut ChaCha8Rng) -> CliResult<CheckResult> {
    let mut worst = Worst::new();
    for c in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for r in FITNESSES {
            for i in 0..11 {
                let a = grid(i, 11);
                let f = n2_f(&N2Params::new(a, 1.0 / (c + 1.0), c, r)?)?;
                worst.see(
                    (f - 1.0).abs(),
                    || json!({ "a": a, "m": 1.0 / (c + 1.0), "c": c, "r": r }),
                );
            }
        }
    }
    for _ in 0..50 {
        let (a, c, r) = n2_admissible(rng);
        let m = n2_moran_selection(a, c, r)?;
        let f = n2_f(&N2Params::new(a, m, c, r)?)?;
        worst.see((f - 1.0).abs(), || json!({ "a": a, "m": m, "c": c, "r": r }));
    }
    Ok(worst.within(STRUCTURAL_TOLERANCE))
}

/// Random `(a, c, r)` with `c, r` log-uniform on `[1/8, 8]`, `r != 1` and
/// `a` in the admissible bracket.
pub fn n2_admissible<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64, f64) {
    let c = rng.gen_range(-3.0f64..3.0).exp2();
    let r = loop {
        let r = rng.gen_range(-3.0f64..3.0).exp2();
        if (r - 1.0).abs() > 1e-3 {
            break r;
        }
    };
    let (lo, hi) = (r.min(1.0) / (r + 1.0), r.max(1.0) / (r + 1.0));
    (rng.gen_range(lo..=hi), c, r)
}

/// Relabelling the two vertices and exchanging the two types.
fn n2_symmetries() -> CliResult<CheckResult> {
    let mut worst = Worst::new();
    for (c, r) in [(2.0, 4.0), (0.5, 0.25)] {
        for i in 0..51 {
            for j in 0..51 {
                let (a, m) = (grid(i, 51), grid(j, 51));
                let f = n2_f(&N2Params::new(a, m, c, r)?)?;
                let relabelled = n2_f(&N2Params::new(1.0 - a, 1.0 - m, 1.0 / c, r)?)?;
                worst.see(
                    (f - relabelled).abs(),
                    || json!({ "identity": "relabel", "a": a, "m": m, "c": c, "r": r }),
                );
                let p = n2_fixation_closed_form(&N2Params::new(a, m, c, r)?)?;
                let q = n2_fixation_closed_form(&N2Params::new(1.0 - a, m, c, 1.0 / r)?)?;
                worst.see(
                    (p + q - 1.0).abs(),
                    || json!({ "identity": "exchange", "a": a, "m": m, "c": c, "r": r }),
                );
            }
        }
    }
    Ok(worst.within(STRUCTURAL_TOLERANCE))
}

fn galanis_random_params<R: Rng + ?Sized>(rng: &mut R) -> CliResult<GalanisParams> {
    let a1: f64 = rng.gen_range(0.0..=1.0);
    let a2 = rng.gen_range(0.0..=1.0 - a1);
    let m1: f64 = rng.gen_range(0.0..=1.0);
    let m2 = rng.gen_range(0.0..=1.0 - m1);
    Ok(GalanisParams::new(a1, a2, m1, m2)?)
}

fn galanis_exact(g: &GalanisParams) -> CliResult<f64> {
    let model = MicSmpModel::new(galanis_weights(), galanis_policy(g)?, 1.0)?;
    Ok(fixation_for_initial(&model, &galanis_initial(g)?)?)
}

fn galanis_closed_form(rng: &mut ChaCha8Rng) -> CliResult<CheckResult> {
    let mut worst = Worst::new();
    for _ in 0..30 {
        let g = galanis_random_params(rng)?;
        let d = (galanis_exact(&g)? - galanis_neutral_fixation(&g)).abs();
        worst.see(d, || json!({ "a1": g.a1, "a2": g.a2, "m1": g.m1, "m2": g.m2 }));
    }
    Ok(worst.within(SOLVER_TOLERANCE))
}

/// Both the closed form and the exact solver give 1/3 in each case.
fn galanis_cases(rng: &mut ChaCha8Rng) -> CliResult<CheckResult> {
    let mut worst = Worst::new();
    for (name, case) in [
        ("case1", GalanisCase::Case1),
        ("case2", GalanisCase::Case2),
        ("case3", GalanisCase::Case3),
    ] {
        for _ in 0..10 {
            let Some(g) = galanis_case_sample(rng, case) else {
                continue;
            };
            let d = (galanis_neutral_fixation(&g) - 1.0 / 3.0)
                .abs()
                .max((galanis_exact(&g)? - 1.0 / 3.0).abs());
            worst.see(
                d,
                || json!({ "case": name, "a1": g.a1, "a2": g.a2, "m1": g.m1, "m2": g.m2 }),
            );
        }
    }
    Ok(worst.within(SOLVER_TOLERANCE))
}

/// Descriptive report on one model; `pass` says whether the property holds.
pub fn model_suite(model: &MicSmpModel) -> CliResult<Checks> {
    let mut checks = Checks::new();
    let w = model.weights();
    let n = model.n();
    let mu = model.policy().as_slice();

    let mut rows = Worst::new();
    for (v, row) in w.rows().enumerate() {
        rows.see((row.iter().sum::<f64>() - 1.0).abs(), || json!({ "row": v }));
    }
    checks.insert("stochasticity".into(), rows.within(STRUCTURAL_TOLERANCE));

    let mut columns = Worst::new();
    for u in 0..n {
        columns.see((w.column_sum(u) - 1.0).abs(), || json!({ "column": u }));
    }
    checks.insert("isothermal".into(), columns.within(STRUCTURAL_TOLERANCE));

    checks.insert(
        "stationarity".into(),
        Worst {
            value: w.stationarity_residual(mu),
            witness: None,
        }
        .within(STRUCTURAL_TOLERANCE),
    );

    let mart = martingale_report(model)?;
    let mut drift = Worst::new();
    drift.see(mart.max_abs_exp_drift, || json!({ "quantity": "exp_drift" }));
    if (model.fitness() - 1.0).abs() <= 1e-12 {
        drift.see(mart.max_abs_drift, || json!({ "quantity": "drift" }));
    }
    checks.insert("martingale".into(), drift.within(STRUCTURAL_TOLERANCE));

    let ratio = ratio_constancy(model)?;
    checks.insert(
        "ratio_constancy".into(),
        CheckResult {
            pass: ratio.max_deviation <= STRUCTURAL_TOLERANCE,
            max_deviation: ratio.max_deviation,
            witness: ratio.worst.map(|x| {
                json!({
                    "mask": x.bits(),
                    "single_mutant_mask": ratio.single_mutant_witness.map(|s| s.bits()),
                    "single_mutant_deviation": ratio.single_mutant_deviation,
                })
            }),
        },
    );

    let lump = macro_markov_check(model)?;
    let (gap, witness) = lump_witness(&lump);
    checks.insert(
        "macro_markov".into(),
        CheckResult {
            pass: lump.lumpable,
            max_deviation: gap,
            witness,
        },
    );

    let (gap, mask) = moran_gap(model)?;
    checks.insert(
        "moran_fixation".into(),
        CheckResult {
            pass: gap <= MORAN_HOLDS_TOLERANCE,
            max_deviation: gap,
            witness: Some(json!({ "mask": mask })),
        },
    );
    Ok(checks)
}
