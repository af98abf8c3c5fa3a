use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("weight matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },

    #[error("need at least 2 and at most {max} vertices, got {n}")]
    VertexCount { n: usize, max: usize },

    #[error("row {row} is not stochastic: {reason}")]
    NotStochastic { row: usize, reason: String },

    #[error("graph is not strongly connected: vertex {vertex} is not mutually reachable from vertex 0")]
    NotStronglyConnected { vertex: usize },

    #[error("{n} vertices exceed the limit of {max} for this operation")]
    TooLarge { n: usize, max: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("level {level} is outside 0..={n}")]
    LevelOutOfRange { n: usize, level: usize },

    #[error("mask {bits:#b} does not fit {n} vertices")]
    MaskOutOfRange { bits: u64, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid selection policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("invalid initial distribution: {0}")]
    InvalidInitial(String),

    #[error("initial distribution puts mass on absorbing configuration {mask:#b}")]
    AtomOnAbsorbing { mask: u64 },

    #[error("trajectory cannot start in absorbing configuration {mask:#b}")]
    AbsorbingStart { mask: u64 },

    #[error("fixed-point iteration did not converge after {sweeps} sweeps (last change {delta:e})")]
    NoConvergence { sweeps: u64, delta: f64 },

    #[error("degenerate denominator in closed form")]
    DegenerateDenominator,

    #[error("a = {a} lies outside the admissible range [{lo}, {hi}]")]
    OutOfRange { a: f64, lo: f64, hi: f64 },

    #[error("selection weight m = {m} lies outside [0, 1]")]
    SelectionOutOfRange { m: f64 },

    #[error("c = 1 and r = 1 simultaneously: only the stationary policy is determined")]
    DegenerateCase,

    #[error("selection formula has a vanishing denominator at a = {a}")]
    ZeroDenominator { a: f64 },
}

impl Error {
    /// Stable variant name, used for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::VertexCount { .. } => "VertexCount",
            Error::NotStochastic { .. } => "NotStochastic",
            Error::NotStronglyConnected { .. } => "NotStronglyConnected",
            Error::TooLarge { .. } => "TooLarge",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::LevelOutOfRange { .. } => "LevelOutOfRange",
            Error::MaskOutOfRange { .. } => "MaskOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidPolicy(_) => "InvalidPolicy",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::InvalidInitial(_) => "InvalidInitial",
            Error::AtomOnAbsorbing { .. } => "AtomOnAbsorbing",
            Error::AbsorbingStart { .. } => "AbsorbingStart",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DegenerateDenominator => "DegenerateDenominator",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::SelectionOutOfRange { .. } => "SelectionOutOfRange",
            Error::DegenerateCase => "DegenerateCase",
            Error::ZeroDenominator { .. } => "ZeroDenominator",
        }
    }

    /// True for errors caused by malformed or inadmissible input, as opposed
    /// to solver failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::NumericalFailure(_) | Error::NoConvergence { .. })
    }
}
