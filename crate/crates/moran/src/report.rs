//! Serialisable command outputs and CSV writers.

use std::collections::BTreeMap;
use std::io::{self, Write};

use moran_core::analysis::SweepGrid;
use moran_core::exact::SolverKind;
use moran_core::{
    FixationReport, InitialDistribution, MicSmpModel, SimulationMode, SimulationResult, TransitionKernel,
};
use serde::Serialize;

use crate::manifest::RunManifest;

#[derive(Debug, Serialize)]
pub struct ModelSummary {
    pub n: usize,
    pub r: f64,
    pub mu: Vec<f64>,
    pub stationary: bool,
}

impl ModelSummary {
    pub fn of(model: &MicSmpModel) -> Self {
        ModelSummary {
            n: model.n(),
            r: model.fitness(),
            mu: model.policy().as_slice().to_vec(),
            stationary: model.is_stationary(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MaskValue {
    pub mask: u64,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct SolverSummary {
    pub method: &'static str,
    pub iterations: u64,
    pub residual: f64,
}

#[derive(Debug, Serialize)]
pub struct ExactOutput {
    pub manifest: RunManifest,
    pub model: ModelSummary,
    pub rho: Vec<MaskValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_alpha: Option<f64>,
    /// Largest `|rho_x - moran_rho(j)|` per level `j`.
    pub deviation: BTreeMap<usize, f64>,
    pub moran: BTreeMap<usize, f64>,
    pub solver: SolverSummary,
}

impl ExactOutput {
    pub fn new(
        manifest: RunManifest,
        model: &MicSmpModel,
        report: &FixationReport,
        alpha: Option<&InitialDistribution>,
    ) -> moran_core::Result<Self> {
        Ok(ExactOutput {
            manifest,
            model: ModelSummary::of(model),
            rho: report
                .values()
                .iter()
                .enumerate()
                .map(|(mask, &value)| MaskValue {
                    mask: mask as u64,
                    value,
                })
                .collect(),
            rho_alpha: alpha.map(|a| report.for_initial(a)).transpose()?,
            deviation: report.per_level_deviation(),
            moran: report.moran_reference(),
            solver: SolverSummary {
                method: match report.solver.kind {
                    SolverKind::Dense => "dense",
                    SolverKind::Iterative => "iterative",
                },
                iterations: report.solver.iterations,
                residual: report.solver.residual,
            },
        })
    }
}

#[derive(Debug, Serialize)]
pub struct SimulateOutput {
    pub manifest: RunManifest,
    pub model: ModelSummary,
    pub mode: &'static str,
    pub max_steps: u64,
    pub trials: u64,
    pub fixations: u64,
    pub extinctions: u64,
    pub censored: u64,
    /// `null` when every trial was censored.
    pub frequency: Option<f64>,
    pub ci_halfwidth: Option<f64>,
    pub seed: u64,
}

impl SimulateOutput {
    pub fn new(
        manifest: RunManifest,
        model: &MicSmpModel,
        mode: SimulationMode,
        max_steps: u64,
        res: &SimulationResult,
    ) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        SimulateOutput {
            manifest,
            model: ModelSummary::of(model),
            mode: mode_name(mode),
            max_steps,
            trials: res.trials,
            fixations: res.fixations,
            extinctions: res.extinctions,
            censored: res.censored,
            frequency: finite(res.frequency),
            ci_halfwidth: finite(res.ci_halfwidth),
            seed: res.seed,
        }
    }
}

pub fn mode_name(mode: SimulationMode) -> &'static str {
    match mode {
        SimulationMode::Faithful => "faithful",
        SimulationMode::EventDriven => "event",
    }
}

#[derive(Debug, Serialize)]
pub struct SweepOutput {
    pub manifest: RunManifest,
    pub c: f64,
    pub r: f64,
    pub grid: usize,
    pub rows: usize,
    /// Cells where the closed form is undefined (written as `NaN`).
    pub undefined: usize,
    pub out: String,
}

/// Result of one verification check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub pass: bool,
    /// `null` when infinite.
    #[serde(serialize_with = "finite_or_null")]
    pub max_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

fn finite_or_null<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyOutput {
    pub manifest: RunManifest,
    /// `"builtin"` for the theorem suite, `"model"` for the descriptive
    /// report on a user model.
    pub suite: &'static str,
    pub all_pass: bool,
    pub checks: BTreeMap<String, CheckResult>,
}

/// Header `a,m,F`, rows in `(a, m)` order, 17 significant digits.
pub fn write_sweep_csv<W: Write + ?Sized>(out: &mut W, grid: &SweepGrid) -> io::Result<()> {
    writeln!(out, "a,m,F")?;
    for (a, m, f) in grid.cells() {
        writeln!(out, "{a:.16e},{m:.16e},{f:.16e}")?;
    }
    Ok(())
}

/// Header `from_mask,to_mask,prob`, nonzero entries sorted by `(from, to)`.
pub fn write_kernel_csv<W: Write + ?Sized>(out: &mut W, kernel: &TransitionKernel) -> io::Result<()> {
    writeln!(out, "from_mask,to_mask,prob")?;
    for (from, to, p) in kernel.entries() {
        writeln!(out, "{from},{to},{p:.16e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use moran_core::analysis::sweep_n2;
    use moran_core::dynamics::transition_kernel;
    use moran_core::WeightMatrix;

    #[test]
    fn sweep_csv_layout() {
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &sweep_n2(1.0, 4.0, 3).unwrap()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a,m,F");
        assert_eq!(lines.len(), 10);
        assert!(lines[2].starts_with("0.0000000000000000e0,5.0000000000000000e-1,"));
        let f: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_csv_rows_sum_to_one() {
        let model = MicSmpModel::uniform(WeightMatrix::complete(3).unwrap(), 2.0).unwrap();
        let mut buf = Vec::new();
        write_kernel_csv(&mut buf, &transition_kernel(&model).unwrap()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut sums = [0.0; 8];
        let mut last = (0, 0);
        for line in text.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let key = (f[0].parse::<usize>().unwrap(), f[1].parse::<usize>().unwrap());
            assert!(key > last || last == (0, 0));
            last = key;
            sums[key.0] += f[2].parse::<f64>().unwrap();
        }
        assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn infinite_deviation_serialises_as_null() {
        let c = CheckResult {
            pass: false,
            max_deviation: f64::INFINITY,
            witness: None,
        };
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"pass":false,"max_deviation":null}"#
        );
    }
}
