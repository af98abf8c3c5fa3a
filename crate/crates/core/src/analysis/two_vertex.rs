//! Two-vertex population `W = [[1 - w1, w1], [w2, 1 - w2]]` with selection
//! policy `(m, 1 - m)`, weight ratio `c = w1 / w2` and initial distribution
//! putting mass `a` on `<0,1>` (mutant at vertex 2, mask `0b10`) and `1 - a`
//! on `<1,0>` (mask `0b01`).

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::MicSmpModel;
use crate::error::{Error, Result};
use crate::exact::{moran_rho, InitialDistribution};
use crate::graph::{Configuration, SelectionPolicy, WeightMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct N2Params {
    pub a: f64,
    pub m: f64,
    pub c: f64,
    pub r: f64,
}

impl N2Params {
    pub fn new(a: f64, m: f64, c: f64, r: f64) -> Result<Self> {
        let p = N2Params { a, m, c, r };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let unit = |name, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value: v })
            }
        };
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value: v })
            }
        };
        unit("a", self.a)?;
        unit("m", self.m)?;
        positive("c", self.c)?;
        positive("r", self.r)
    }
}

/// Fixation probability
/// `r a (1 - m) / (m c + r (1 - m)) + r m (1 - a) / ((1 - m)/c + r m)`.
pub fn n2_fixation_closed_form(p: &N2Params) -> Result<f64> {
    p.validate()?;
    let N2Params { a, m, c, r } = *p;
    let d1 = m * c + r * (1.0 - m);
    let d2 = (1.0 - m) / c + r * m;
    if !(d1 > 0.0 && d1.is_finite() && d2 > 0.0 && d2.is_finite()) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(r * a * (1.0 - m) / d1 + r * m * (1.0 - a) / d2)
}

/// Fixation probability relative to the Moran value `r / (r + 1)`.
pub fn n2_f(p: &N2Params) -> Result<f64> {
    Ok(n2_fixation_closed_form(p)? / moran_rho(1, 2, p.r))
}

/// Selection weight `m` for which the fixation probability from
/// `(a, 1 - a)` equals the Moran value:
/// `m = (a (r + 1) - r) / (a (r + 1) (1 - c) + c - r)`.
///
/// `a` must lie in `[min(1, r), max(1, r)] / (r + 1)`. For `r = 1` the
/// range is the single point `a = 1/2`, where every `m` gives the Moran
/// value and the formula is `0/0`; `m = 0` is returned.
pub fn n2_moran_selection(a: f64, c: f64, r: f64) -> Result<f64> {
    for (name, v) in [("c", c), ("r", r)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter { name, value: v });
        }
    }
    if (c - 1.0).abs() <= 1e-12 && (r - 1.0).abs() <= 1e-12 {
        return Err(Error::DegenerateCase);
    }
    let lo = f64::min(1.0, r) / (r + 1.0);
    let hi = f64::max(1.0, r) / (r + 1.0);
    if !(a >= lo - 1e-12 && a <= hi + 1e-12) {
        return Err(Error::OutOfRange { a, lo, hi });
    }
    if (r - 1.0).abs() <= 1e-12 {
        return Ok(0.0);
    }
    let numerator = a * (r + 1.0) - r;
    let lead = a * (r + 1.0) * (1.0 - c);
    let denominator = lead + c - r;
    if denominator.abs() <= 1e-12 * (1.0 + lead.abs() + c + r) {
        return Err(Error::ZeroDenominator { a });
    }
    let m = numerator / denominator;
    if !(-1e-12..=1.0 + 1e-12).contains(&m) {
        return Err(Error::SelectionOutOfRange { m });
    }
    Ok(m.clamp(0.0, 1.0))
}

/// Weights `(w1, w2)` in `(0, 1]` with `w1 / w2 = c`.
pub fn n2_weights_for_ratio(c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter { name: "c", value: c });
    }
    Ok(if c <= 1.0 { (c, 1.0) } else { (1.0, 1.0 / c) })
}

pub fn n2_model(w1: f64, w2: f64, m: f64, r: f64) -> Result<MicSmpModel> {
    let w = WeightMatrix::two_vertex(w1, w2)?;
    let policy = SelectionPolicy::new(vec![m, 1.0 - m])?;
    MicSmpModel::new(w, policy, r)
}

/// `(a, 1 - a)` on masks `0b10` and `0b01`.
pub fn n2_initial(a: f64) -> Result<InitialDistribution> {
    InitialDistribution::new(vec![
        (Configuration::new(0b10, 2)?, a),
        (Configuration::new(0b01, 2)?, 1.0 - a),
    ])
}

/// Values of `F(m, a | c, r)` on a `grid x grid` lattice of `[0, 1]^2`.
/// Row index is `a`, column index is `m`; NaN where the closed form is
/// undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub c: f64,
    pub r: f64,
    pub grid: usize,
    values: Vec<f64>,
}

impl SweepGrid {
    /// Lattice coordinate `k / (grid - 1)`.
    pub fn coordinate(&self, k: usize) -> f64 {
        k as f64 / (self.grid - 1) as f64
    }

    pub fn get(&self, a_index: usize, m_index: usize) -> f64 {
        self.values[a_index * self.grid + m_index]
    }

    /// `(a, m, F)` triples in lexicographic `(a, m)` order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.grid)
            .flat_map(move |i| (0..self.grid).map(move |j| (self.coordinate(i), self.coordinate(j), self.get(i, j))))
    }
}

pub fn sweep_n2(c: f64, r: f64, grid: usize) -> Result<SweepGrid> {
    if grid < 2 {
        return Err(Error::InvalidParameter {
            name: "grid",
            value: grid as f64,
        });
    }
    for (name, v) in [("c", c), ("r", r)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter { name, value: v });
        }
    }
    let step = |k: usize| k as f64 / (grid - 1) as f64;
    let values = (0..grid)
        .flat_map(|i| (0..grid).map(move |j| (step(i), step(j))))
        .map(|(a, m)| n2_f(&N2Params { a, m, c, r }).unwrap_or(f64::NAN))
        .collect();
    Ok(SweepGrid { c, r, grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::fixation_for_initial;

    #[test]
    fn stationary_policy_gives_moran_for_every_a() {
        for c in [0.25, 1.0, 3.0] {
            for r in [0.5, 1.0, 2.0] {
                for k in 0..=10 {
                    let a = k as f64 / 10.0;
                    let p = N2Params::new(a, 1.0 / (c + 1.0), c, r).unwrap();
                    assert!((n2_fixation_closed_form(&p).unwrap() - r / (r + 1.0)).abs() < 1e-12);
                    assert!((n2_f(&p).unwrap() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn closed_form_matches_exact_solver() {
        for (w1, w2) in [(0.3, 0.9), (1.0, 0.5), (0.7, 0.7)] {
            for r in [0.5, 1.0, 2.0] {
                for m in [0.0, 0.2, 0.65, 1.0] {
                    let model = n2_model(w1, w2, m, r).unwrap();
                    for a in [0.0, 0.3, 1.0] {
                        let exact = fixation_for_initial(&model, &n2_initial(a).unwrap()).unwrap();
                        let p = N2Params::new(a, m, w1 / w2, r).unwrap();
                        assert!((n2_fixation_closed_form(&p).unwrap() - exact).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn forced_fixation_boundary() {
        // a = 1, m = 0: mutant on vertex 2 and only vertex 2 reproduces
        let p = N2Params::new(1.0, 0.0, 0.4, 3.0).unwrap();
        assert_eq!(n2_fixation_closed_form(&p).unwrap(), 1.0);
    }

    #[test]
    fn selection_examples() {
        assert_eq!(n2_moran_selection(0.5, 2.0, 1.0).unwrap(), 0.0);
        let p = N2Params::new(0.5, 0.0, 2.0, 1.0).unwrap();
        assert!((n2_f(&p).unwrap() - 1.0).abs() < 1e-15);
        for m in [0.2, 0.7, 1.0] {
            let p = N2Params::new(0.5, m, 2.0, 1.0).unwrap();
            assert!((n2_f(&p).unwrap() - 1.0).abs() < 1e-15);
        }
        for r in [0.3, 2.0, 5.0] {
            let a = r / (r + 1.0);
            assert!(n2_moran_selection(a, 0.7, r).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn selection_errors() {
        assert_eq!(n2_moran_selection(0.5, 1.0, 1.0), Err(Error::DegenerateCase));
        assert!(matches!(
            n2_moran_selection(0.9, 2.0, 2.0),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            n2_moran_selection(0.5, -1.0, 2.0),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn symmetric_neutral_sweep() {
        // c = r = 1: F = 2 (a + m - 2 a m), equal to one exactly on the lines
        // a = 1/2 and m = 1/2
        let g = sweep_n2(1.0, 1.0, 11).unwrap();
        for (a, m, f) in g.cells() {
            assert!((f - 2.0 * (a + m - 2.0 * a * m)).abs() < 1e-12);
        }
        for k in 0..11 {
            assert!((g.get(5, k) - 1.0).abs() < 1e-12);
            assert!((g.get(k, 5) - 1.0).abs() < 1e-12);
        }
        assert!(sweep_n2(1.0, 1.0, 1).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(N2Params::new(1.5, 0.5, 1.0, 1.0).is_err());
        assert!(N2Params::new(0.5, 0.5, 0.0, 1.0).is_err());
        assert!(N2Params::new(0.5, 0.5, 1.0, -2.0).is_err());
        assert!(n2_weights_for_ratio(0.0).is_err());
        assert_eq!(n2_weights_for_ratio(4.0).unwrap(), (1.0, 0.25));
    }
}
