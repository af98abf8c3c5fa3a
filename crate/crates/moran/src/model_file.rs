//! Model files and builtin models.
//!
//! A model file is JSON:
//!
//! ```json
//! {"n": 3, "W": [[0, "1/4", "3/4"], [0.25, 0, 0.75], [0.5, 0.5, 0]],
//!  "mu": "stationary", "r": 1.0}
//! ```
//!
//! Entries of `W` and of an explicit `mu` vector may be numbers or exact
//! rationals written `"p/q"`. `mu` is a vector, `"stationary"` (default) or
//! `"uniform"`; `r` defaults to 1.
//!
//! Builtins are named with a leading `@`: `@galanis`, `@complete:N`,
//! `@n2:W1,W2`.

use std::fs;

use moran_core::analysis::galanis_weights;
use moran_core::{MicSmpModel, SelectionPolicy, WeightMatrix};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    fn value(&self) -> CliResult<f64> {
        match self {
            Number::Float(x) => Ok(*x),
            Number::Text(s) => parse_number(s),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawPolicy {
    Vector(Vec<Number>),
    Keyword(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n: usize,
    #[serde(rename = "W", alias = "w")]
    weights: Vec<Vec<Number>>,
    #[serde(default)]
    mu: Option<RawPolicy>,
    #[serde(default)]
    r: Option<f64>,
}

/// Selection policy as written, resolved against `W` when the model is built.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Stationary,
    Uniform,
    Explicit(Vec<f64>),
}

impl PolicySpec {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s.trim() {
            "stationary" | "pi" => Ok(PolicySpec::Stationary),
            "uniform" => Ok(PolicySpec::Uniform),
            list => list
                .split(',')
                .map(parse_number)
                .collect::<CliResult<Vec<_>>>()
                .map(PolicySpec::Explicit),
        }
    }

    fn resolve(&self, w: &WeightMatrix) -> CliResult<SelectionPolicy> {
        Ok(match self {
            PolicySpec::Stationary => w.stationary_distribution()?.to_policy(),
            PolicySpec::Uniform => SelectionPolicy::uniform(w.n()),
            PolicySpec::Explicit(mu) => SelectionPolicy::new(mu.clone())?,
        })
    }
}

/// Parsed model before command-line overrides.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub weights: WeightMatrix,
    pub policy: PolicySpec,
    pub fitness: f64,
}

impl ModelSpec {
    pub fn with_overrides(mut self, r: Option<f64>, mu: Option<&str>) -> CliResult<Self> {
        if let Some(r) = r {
            self.fitness = r;
        }
        if let Some(mu) = mu {
            self.policy = PolicySpec::parse(mu)?;
        }
        Ok(self)
    }

    pub fn build(&self) -> CliResult<MicSmpModel> {
        let policy = self.policy.resolve(&self.weights)?;
        Ok(MicSmpModel::new(self.weights.clone(), policy, self.fitness)?)
    }
}

/// `"p/q"`, an integer or a decimal. Rationals are divided in floating
/// point after exact integer parsing, so `"1/3"` is the double nearest 1/3.
pub fn parse_number(s: &str) -> CliResult<f64> {
    let s = s.trim();
    let bad = || CliError::Parse(format!("not a number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(CliError::Parse(format!("zero denominator in {s:?}")));
        }
        if p.unsigned_abs() > 1 << 53 || q.unsigned_abs() > 1 << 53 {
            return Err(CliError::Parse(format!("rational {s:?} is not exactly representable")));
        }
        return Ok(p as f64 / q as f64);
    }
    s.parse::<f64>().map_err(|_| bad())
}

pub fn parse_model_json(text: &str) -> CliResult<ModelSpec> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("model file: {e}")))?;
    if raw.weights.len() != raw.n {
        return Err(moran_core::Error::DimensionMismatch {
            expected: raw.n,
            found: raw.weights.len(),
        }
        .into());
    }
    let rows = raw
        .weights
        .iter()
        .map(|row| row.iter().map(Number::value).collect::<CliResult<Vec<f64>>>())
        .collect::<CliResult<Vec<_>>>()?;
    let weights = WeightMatrix::from_rows(&rows)?;
    let policy = match raw.mu {
        None => PolicySpec::Stationary,
        Some(RawPolicy::Keyword(k)) => match PolicySpec::parse(&k)? {
            PolicySpec::Explicit(_) => return Err(CliError::Parse(format!("unknown policy {k:?}"))),
            p => p,
        },
        Some(RawPolicy::Vector(v)) => PolicySpec::Explicit(v.iter().map(Number::value).collect::<CliResult<_>>()?),
    };
    Ok(ModelSpec {
        weights,
        policy,
        fitness: raw.r.unwrap_or(1.0),
    })
}

pub fn builtin(name: &str) -> CliResult<ModelSpec> {
    let unknown = || CliError::Parse(format!("unknown builtin model @{name}"));
    let (head, args) = name.split_once(':').unwrap_or((name, ""));
    let weights = match head {
        "galanis" if args.is_empty() => galanis_weights(),
        "complete" => {
            let n: usize = args.parse().map_err(|_| unknown())?;
            WeightMatrix::complete(n)?
        }
        "n2" => {
            let (w1, w2) = args.split_once(',').ok_or_else(unknown)?;
            WeightMatrix::two_vertex(parse_number(w1)?, parse_number(w2)?)?
        }
        _ => return Err(unknown()),
    };
    Ok(ModelSpec {
        weights,
        policy: PolicySpec::Stationary,
        fitness: 1.0,
    })
}

/// `@builtin` or a path to a model file.
pub fn load_model_spec(source: &str) -> CliResult<ModelSpec> {
    match source.strip_prefix('@') {
        Some(name) => builtin(name),
        None => {
            let text = fs::read_to_string(source).map_err(|e| CliError::Input {
                path: source.to_string(),
                source: e,
            })?;
            parse_model_json(&text)
        }
    }
}

pub fn load_model(source: &str, r: Option<f64>, mu: Option<&str>) -> CliResult<MicSmpModel> {
    load_model_spec(source)?.with_overrides(r, mu)?.build()
}
