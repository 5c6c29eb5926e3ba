//! Local monomial invariants `(l, μ)` and the order on characteristic indices.
//!
//! For exponent vectors `A = (a_1..a_n)`, `B = (b_1..b_n)` each coordinate has
//! the threshold `l_j = (b_j + 1) / a_j` (infinite when `a_j = 0`). The local
//! index is the minimum `l` together with the number of coordinates `μ` that
//! attain it. Indices are ordered so that "greater" means "more singular":
//! a smaller `l` wins, and at equal `l` the larger `μ` wins.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::rational::{rational_to_f64, ExtRational, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharIndexError {
    #[error("exponent vectors have lengths {a} and {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("growth orders are not strictly ordered: {big} is not greater than {small}")]
    NotStrictlyOrdered { big: GrowthOrder, small: GrowthOrder },
    #[error("grid value {0} is outside (0, 1/e)")]
    GridOutOfRange(f64),
}

/// The multi-index pair `(A, B)` of a local monomial model.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndexPair {
    a: Vec<u32>,
    b: Vec<u32>,
}

impl MultiIndexPair {
    pub fn new(a: Vec<u32>, b: Vec<u32>) -> Result<Self, CharIndexError> {
        if a.len() != b.len() {
            return Err(CharIndexError::LengthMismatch { a: a.len(), b: b.len() });
        }
        if a.is_empty() {
            return Err(CharIndexError::EmptyDimension);
        }
        Ok(Self { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[u32] {
        &self.a
    }

    pub fn b(&self) -> &[u32] {
        &self.b
    }

    /// Per-coordinate thresholds `l_j`.
    pub fn thresholds(&self) -> Vec<ExtRational> {
        self.a.iter().zip(&self.b).map(|(&a, &b)| ExtRational::threshold(a, b)).collect()
    }

    /// Reorders coordinates: coordinate `i` of the result is coordinate `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            a: perm.iter().map(|&i| self.a[i]).collect(),
            b: perm.iter().map(|&i| self.b[i]).collect(),
        }
    }
}

/// A characteristic index `(l, μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CharIndex {
    pub l: ExtRational,
    pub mu: u32,
}

impl CharIndex {
    /// The index of a chart that misses the divisor entirely.
    pub const EMPTY: CharIndex = CharIndex { l: ExtRational::Infinite, mu: 0 };

    pub fn new(l: ExtRational, mu: u32) -> Option<Self> {
        match (l.is_finite(), mu) {
            (false, 0) => Some(Self::EMPTY),
            (true, mu) if mu >= 1 => Some(Self { l, mu }),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.l.is_finite()
    }
}

impl Ord for CharIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        // smaller threshold is more singular
        other.l.cmp(&self.l).then(self.mu.cmp(&other.mu))
    }
}

impl PartialOrd for CharIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CharIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.l, self.mu)
    }
}

/// The growth order of `t^power (ln 1/t)^log_power` as `t → 0`, ordered by
/// the same rule as characteristic indices: greater means larger near zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GrowthOrder {
    pub power: Rational,
    pub log_power: u32,
}

impl GrowthOrder {
    pub fn new(power: Rational, log_power: u32) -> Self {
        Self { power, log_power }
    }
}

impl Ord for GrowthOrder {
    fn cmp(&self, other: &Self) -> Ordering {
        other.power.cmp(&self.power).then(self.log_power.cmp(&other.log_power))
    }
}

impl PartialOrd for GrowthOrder {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GrowthOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.power, self.log_power)
    }
}

impl From<CharIndex> for Option<GrowthOrder> {
    fn from(c: CharIndex) -> Self {
        c.l.finite().map(|l| GrowthOrder::new(l, c.mu))
    }
}

pub fn local_char_index(pair: &MultiIndexPair) -> CharIndex {
    let ls = pair.thresholds();
    let l = ls.iter().copied().min().unwrap_or(ExtRational::Infinite);
    if !l.is_finite() {
        return CharIndex::EMPTY;
    }
    let mu = ls.iter().filter(|&&x| x == l).count() as u32;
    CharIndex { l, mu }
}

pub fn compare_char_index(x: &CharIndex, y: &CharIndex) -> Ordering {
    x.cmp(y)
}

/// Ratios `t^{l'} (ln 1/t)^{μ'} / (t^l (ln 1/t)^μ)` along `t_grid`, where
/// `big = (l, μ)` and `small = (l', μ')`. The sequence tends to zero as `t → 0`
/// whenever `big > small`.
pub fn dominance_ratio_profile(
    big: &GrowthOrder,
    small: &GrowthOrder,
    t_grid: &[f64],
) -> Result<Vec<f64>, CharIndexError> {
    if big <= small {
        return Err(CharIndexError::NotStrictlyOrdered { big: *big, small: *small });
    }
    let upper = (-1.0f64).exp();
    let power_gap = rational_to_f64(&(small.power - big.power));
    let log_gap = small.log_power as f64 - big.log_power as f64;
    t_grid
        .iter()
        .map(|&t| {
            if !(t > 0.0 && t < upper) {
                return Err(CharIndexError::GridOutOfRange(t));
            }
            let log_inv = (1.0 / t).ln();
            Ok((power_gap * t.ln() + log_gap * log_inv.ln()).exp())
        })
        .collect()
}

/// Permutation putting coordinates in nondecreasing threshold order, minimizers
/// first, ties broken by the original coordinate index.
pub fn canonical_chart_order(pair: &MultiIndexPair) -> Vec<usize> {
    let ls = pair.thresholds();
    let mut perm: Vec<usize> = (0..ls.len()).collect();
    perm.sort_by(|&i, &j| ls[i].cmp(&ls[j]));
    perm
}
