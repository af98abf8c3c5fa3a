//! Population structure: weight matrices, stationary distributions,
//! selection policies and mutant configurations.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance used for stochasticity and stationarity checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Largest vertex count representable by a [`Configuration`] mask.
pub const MAX_VERTICES: usize = 63;

/// Options for [`validate_weight_matrix_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub tolerance: f64,
    /// Reject matrices larger than this (used when the matrix is destined
    /// for an exact solve over all `2^n` configurations).
    pub max_vertices: Option<usize>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_vertices: None,
        }
    }
}

/// Row-stochastic weight matrix of a strongly connected population graph.
///
/// Entry `(v, u)` is the probability that an individual at `v`, once
/// selected, places its offspring on `u`. Self-loops are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    entries: Vec<f64>,
}

/// Validates a raw square matrix with the default tolerance.
pub fn validate_weight_matrix(raw: &[Vec<f64>]) -> Result<WeightMatrix> {
    validate_weight_matrix_with(raw, ValidationOptions::default())
}

pub fn validate_weight_matrix_with(raw: &[Vec<f64>], opts: ValidationOptions) -> Result<WeightMatrix> {
    let n = raw.len();
    if !(2..=MAX_VERTICES).contains(&n) {
        return Err(Error::VertexCount { n, max: MAX_VERTICES });
    }
    for (row, r) in raw.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NotSquare { row, len: r.len(), n });
        }
    }
    if let Some(max) = opts.max_vertices {
        if n > max {
            return Err(Error::TooLarge { n, max });
        }
    }
    for (row, r) in raw.iter().enumerate() {
        if let Some(&bad) = r.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::NotStochastic {
                row,
                reason: format!("entry {bad} is outside [0, 1]"),
            });
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > opts.tolerance {
            return Err(Error::NotStochastic {
                row,
                reason: format!("row sum is {sum}"),
            });
        }
    }
    let entries: Vec<f64> = raw.iter().flatten().copied().collect();
    let w = WeightMatrix { n, entries };
    w.check_strongly_connected()?;
    Ok(w)
}

impl WeightMatrix {
    /// Builds and validates a matrix from its rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        validate_weight_matrix(rows)
    }

    /// Complete graph with loops: every entry equals `1/n`.
    pub fn complete(n: usize) -> Result<Self> {
        if !(2..=MAX_VERTICES).contains(&n) {
            return Err(Error::VertexCount { n, max: MAX_VERTICES });
        }
        let w = 1.0 / n as f64;
        Ok(WeightMatrix {
            n,
            entries: vec![w; n * n],
        })
    }

    /// Two-vertex graph `[[1 - w1, w1], [w2, 1 - w2]]` with `w1, w2 in (0, 1]`.
    pub fn two_vertex(w1: f64, w2: f64) -> Result<Self> {
        for (name, w) in [("w1", w1), ("w2", w2)] {
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::InvalidParameter { name, value: w });
            }
        }
        validate_weight_matrix(&[vec![1.0 - w1, w1], vec![w2, 1.0 - w2]])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.n + to]
    }

    #[inline]
    pub fn row(&self, v: usize) -> &[f64] {
        &self.entries[v * self.n..(v + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn column_sum(&self, u: usize) -> f64 {
        (0..self.n).map(|v| self.get(v, u)).sum()
    }

    /// Errors with [`Error::TooLarge`] if `n > max`.
    pub fn ensure_at_most(&self, max: usize) -> Result<()> {
        if self.n > max {
            Err(Error::TooLarge { n: self.n, max })
        } else {
            Ok(())
        }
    }

    /// Bistochastic (every column also sums to one). Equivalent to the
    /// isothermal property of the graph.
    pub fn is_isothermal(&self) -> bool {
        self.is_isothermal_within(DEFAULT_TOLERANCE)
    }

    pub fn is_isothermal_within(&self, tol: f64) -> bool {
        (0..self.n).all(|u| (self.column_sum(u) - 1.0).abs() <= tol)
    }

    /// `mu W` for a row vector `mu`.
    pub fn left_apply(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (v, row) in self.rows().enumerate() {
            for (o, w) in out.iter_mut().zip(row) {
                *o += mu[v] * w;
            }
        }
        out
    }

    /// `max_u |(mu W)_u - mu_u|`.
    pub fn stationarity_residual(&self, mu: &[f64]) -> f64 {
        self.left_apply(mu)
            .iter()
            .zip(mu)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn stationary_distribution(&self) -> Result<StationaryDistribution> {
        stationary_distribution(self)
    }

    // Forward and backward reachability from vertex 0 over the off-diagonal
    // positive edges. Both cover every vertex iff the digraph is a single
    // strongly connected component.
    fn check_strongly_connected(&self) -> Result<()> {
        let n = self.n;
        for reverse in [false, true] {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for (u, flag) in seen.iter_mut().enumerate() {
                    let w = if reverse { self.get(u, v) } else { self.get(v, u) };
                    if u != v && w > 0.0 && !*flag {
                        *flag = true;
                        stack.push(u);
                    }
                }
            }
            if let Some(vertex) = seen.iter().position(|s| !s) {
                return Err(Error::NotStronglyConnected { vertex });
            }
        }
        Ok(())
    }
}

/// Strictly positive probability vector `pi` with `pi W = pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pi: Vec<f64>,
}

impl StationaryDistribution {
    pub fn as_slice(&self) -> &[f64] {
        &self.pi
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.pi
    }

    pub fn to_policy(&self) -> SelectionPolicy {
        SelectionPolicy { mu: self.pi.clone() }
    }
}

/// Solves `pi (W - I) = 0` with one balance equation replaced by the
/// normalisation `sum pi = 1`.
pub fn stationary_distribution(w: &WeightMatrix) -> Result<StationaryDistribution> {
    let n = w.n();
    // rows of the system are the columns of (W - I); the last one becomes 1...1
    let mut a = vec![0.0; n * n];
    for i in 0..n - 1 {
        for j in 0..n {
            a[i * n + j] = w.get(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[(n - 1) * n..].fill(1.0);
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;

    let pi =
        linalg::solve_refined(&a, n, &b).ok_or_else(|| Error::NumericalFailure("singular stationary system".into()))?;
    if let Some(p) = pi.iter().find(|p| !(**p > 0.0)) {
        return Err(Error::NumericalFailure(format!(
            "stationary vector has non-positive entry {p}"
        )));
    }
    let residual = w.stationarity_residual(&pi);
    let mass: f64 = pi.iter().sum();
    if residual > DEFAULT_TOLERANCE || (mass - 1.0).abs() > DEFAULT_TOLERANCE {
        return Err(Error::NumericalFailure(format!(
            "stationary residual {residual:e}, mass {mass}"
        )));
    }
    Ok(StationaryDistribution { pi })
}

/// Standalone form of [`WeightMatrix::is_isothermal`].
pub fn is_isothermal(w: &WeightMatrix) -> bool {
    w.is_isothermal()
}

/// Probability distribution over vertices used to pick the reproducing
/// individual.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionPolicy {
    mu: Vec<f64>,
}

impl SelectionPolicy {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if let Some(bad) = mu.iter().find(|m| !(**m >= 0.0 && m.is_finite())) {
            return Err(Error::InvalidPolicy(format!("negative or non-finite entry {bad}")));
        }
        let sum: f64 = mu.iter().sum();
        if (sum - 1.0).abs() > DEFAULT_TOLERANCE {
            return Err(Error::InvalidPolicy(format!("entries sum to {sum}")));
        }
        Ok(SelectionPolicy { mu })
    }

    pub fn uniform(n: usize) -> Self {
        SelectionPolicy {
            mu: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    #[inline]
    pub fn get(&self, v: usize) -> f64 {
        self.mu[v]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mu
    }
}

impl From<StationaryDistribution> for SelectionPolicy {
    fn from(s: StationaryDistribution) -> Self {
        SelectionPolicy { mu: s.pi }
    }
}

/// Assignment of mutant (bit set) or wildtype (bit clear) to each vertex.
/// Vertex `v` (0-based) is bit `v`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    bits: u64,
    n: u8,
}

impl Configuration {
    pub fn new(bits: u64, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_VERTICES {
            return Err(Error::VertexCount { n, max: MAX_VERTICES });
        }
        if bits >> n != 0 {
            return Err(Error::MaskOutOfRange { bits, n });
        }
        Ok(Configuration { bits, n: n as u8 })
    }

    /// Caller guarantees `bits < 2^n` and `1 <= n <= MAX_VERTICES`.
    #[inline]
    pub(crate) fn from_raw(bits: u64, n: usize) -> Self {
        debug_assert!(n <= MAX_VERTICES && bits >> n == 0);
        Configuration { bits, n: n as u8 }
    }

    pub fn empty(n: usize) -> Self {
        Configuration::from_raw(0, n)
    }

    pub fn full(n: usize) -> Self {
        Configuration::from_raw(full_mask(n), n)
    }

    /// Configuration with a single mutant at vertex `v`.
    pub fn single(v: usize, n: usize) -> Result<Self> {
        if v >= n {
            return Err(Error::MaskOutOfRange {
                bits: 1u64.checked_shl(v as u32).unwrap_or(0),
                n,
            });
        }
        Configuration::new(1 << v, n)
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn n(self) -> usize {
        self.n as usize
    }

    /// Number of mutants.
    #[inline]
    pub fn level(self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_mutant(self, v: usize) -> bool {
        self.bits >> v & 1 == 1
    }

    #[inline]
    pub fn is_absorbing(self) -> bool {
        self.bits == 0 || self.bits == full_mask(self.n())
    }

    /// Same configuration with vertex `v` flipped.
    #[inline]
    pub fn flipped(self, v: usize) -> Self {
        Configuration::from_raw(self.bits ^ (1 << v), self.n())
    }

    /// Mutants become wildtypes and vice versa.
    pub fn complement(self) -> Self {
        Configuration::from_raw(!self.bits & full_mask(self.n()), self.n())
    }

    /// 0/1 vector representation.
    pub fn to_vector(self) -> Vec<f64> {
        (0..self.n())
            .map(|v| if self.is_mutant(v) { 1.0 } else { 0.0 })
            .collect()
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({:0width$b})", self.bits, width = self.n())
    }
}

impl fmt::Display for Configuration {
    // vertex 1 first, matching the usual vector notation
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for v in 0..self.n() {
            if v > 0 {
                f.write_str(",")?;
            }
            f.write_str(if self.is_mutant(v) { "1" } else { "0" })?;
        }
        f.write_str(">")
    }
}

#[inline]
pub(crate) fn full_mask(n: usize) -> u64 {
    (1u64 << n) - 1
}

/// Number of mutants in `x`; the index of its block in the decomposition of
/// all configurations by level.
pub fn canonical_level(x: Configuration) -> usize {
    x.level()
}

/// All configurations with exactly `j` mutants, in increasing mask order.
pub fn enumerate_level(n: usize, j: usize) -> Result<Vec<Configuration>> {
    if n == 0 || n > MAX_VERTICES {
        return Err(Error::VertexCount { n, max: MAX_VERTICES });
    }
    if j > n {
        return Err(Error::LevelOutOfRange { n, level: j });
    }
    Ok(LevelIter::new(n, j).collect())
}

/// Iterator over the masks of one level (Gosper's hack).
#[derive(Debug, Clone)]
pub struct LevelIter {
    next: Option<u64>,
    n: usize,
}

impl LevelIter {
    pub fn new(n: usize, j: usize) -> Self {
        let next = if j <= n { Some(full_mask(j)) } else { None };
        LevelIter { next, n }
    }
}

impl Iterator for LevelIter {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        let cur = self.next?;
        let limit = 1u64 << self.n;
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let nxt = (((r ^ cur) >> 2) / c) | r;
            (nxt < limit && nxt > cur).then_some(nxt)
        };
        Some(Configuration::from_raw(cur, self.n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn galanis() -> WeightMatrix {
        WeightMatrix::from_rows(&[vec![0.0, 0.25, 0.75], vec![0.25, 0.0, 0.75], vec![0.5, 0.5, 0.0]]).unwrap()
    }

    #[test]
    fn accepts_two_vertex_swap() {
        let w = validate_weight_matrix(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(w.n(), 2);
    }

    #[test]
    fn identity_is_not_connected() {
        let err = validate_weight_matrix(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap_err();
        assert_eq!(err.kind(), "NotStronglyConnected");
    }

    #[test]
    fn row_sum_off_is_not_stochastic() {
        let err = validate_weight_matrix(&[vec![0.5, 0.6], vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, Error::NotStochastic { row: 0, .. }));
    }

    #[test]
    fn negative_entry_is_not_stochastic() {
        let err = validate_weight_matrix(&[vec![-0.5, 1.5], vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, Error::NotStochastic { row: 0, .. }));
    }

    #[test]
    fn one_way_chain_is_not_connected() {
        let err = validate_weight_matrix(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotStronglyConnected { .. }));
    }

    #[test]
    fn ragged_and_tiny_inputs() {
        assert!(matches!(
            validate_weight_matrix(&[vec![1.0]]),
            Err(Error::VertexCount { n: 1, .. })
        ));
        assert!(matches!(
            validate_weight_matrix(&[vec![0.5, 0.5], vec![1.0]]),
            Err(Error::NotSquare { row: 1, .. })
        ));
    }

    #[test]
    fn exact_use_size_limit() {
        let opts = ValidationOptions {
            max_vertices: Some(2),
            ..Default::default()
        };
        let raw = WeightMatrix::complete(3).unwrap().to_rows();
        assert_eq!(
            validate_weight_matrix_with(&raw, opts),
            Err(Error::TooLarge { n: 3, max: 2 })
        );
    }

    #[test]
    fn galanis_stationary() {
        let pi = galanis().stationary_distribution().unwrap();
        let expect = [2.0 / 7.0, 2.0 / 7.0, 3.0 / 7.0];
        for (p, e) in pi.as_slice().iter().zip(expect) {
            assert!((p - e).abs() < 1e-12);
        }
    }

    #[test]
    fn complete_graph_stationary_is_uniform() {
        for n in 2..8 {
            let pi = WeightMatrix::complete(n).unwrap().stationary_distribution().unwrap();
            assert!(pi.as_slice().iter().all(|p| (p - 1.0 / n as f64).abs() < 1e-12));
        }
    }

    #[test]
    fn two_vertex_stationary() {
        let (w1, w2) = (0.3, 0.8);
        let c = w1 / w2;
        let pi = WeightMatrix::two_vertex(w1, w2)
            .unwrap()
            .stationary_distribution()
            .unwrap();
        assert!((pi.as_slice()[0] - 1.0 / (c + 1.0)).abs() < 1e-12);
        assert!((pi.as_slice()[1] - c / (c + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn isothermal_examples() {
        assert!(WeightMatrix::complete(5).unwrap().is_isothermal());
        assert!(!galanis().is_isothermal());
        let cols: Vec<f64> = (0..3).map(|u| galanis().column_sum(u)).collect();
        assert_eq!(cols, vec![0.75, 0.75, 1.5]);
        let sym = WeightMatrix::from_rows(&[vec![0.2, 0.3, 0.5], vec![0.3, 0.4, 0.3], vec![0.5, 0.3, 0.2]]).unwrap();
        assert!(sym.is_isothermal());
    }

    #[test]
    fn levels() {
        assert_eq!(canonical_level(Configuration::empty(4)), 0);
        assert_eq!(canonical_level(Configuration::full(4)), 4);
        assert_eq!(canonical_level(Configuration::new(0b101, 3).unwrap()), 2);
        let bits = |v: Vec<Configuration>| v.into_iter().map(Configuration::bits).collect::<Vec<_>>();
        assert_eq!(bits(enumerate_level(3, 1).unwrap()), vec![0b001, 0b010, 0b100]);
        assert_eq!(bits(enumerate_level(3, 0).unwrap()), vec![0]);
        assert_eq!(bits(enumerate_level(3, 3).unwrap()), vec![0b111]);
        assert_eq!(enumerate_level(4, 2).unwrap().len(), 6);
        assert!(matches!(enumerate_level(3, 4), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn levels_partition_configurations() {
        for n in 1..=12 {
            let mut all: Vec<u64> = (0..=n)
                .flat_map(|j| enumerate_level(n, j).unwrap())
                .map(Configuration::bits)
                .collect();
            assert_eq!(all.len(), 1 << n);
            all.sort_unstable();
            all.dedup();
            assert_eq!(all.len(), 1 << n);
        }
    }

    #[test]
    fn configuration_bounds() {
        assert!(Configuration::new(0b1000, 3).is_err());
        assert!(Configuration::single(3, 3).is_err());
        let x = Configuration::new(0b011, 3).unwrap();
        assert_eq!(x.complement().bits(), 0b100);
        assert_eq!(x.to_string(), "<1,1,0>");
        assert!(Configuration::full(3).is_absorbing());
    }

    #[test]
    fn policy_validation() {
        assert!(SelectionPolicy::new(vec![0.5, 0.6]).is_err());
        assert!(SelectionPolicy::new(vec![-0.1, 1.1]).is_err());
        assert!(SelectionPolicy::new(vec![0.25, 0.75]).is_ok());
    }
}
