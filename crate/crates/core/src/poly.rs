//! Sparse complex polynomials in `n` variables.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("term {index}: exponent vector has length {got}, expected {expected}")]
    ExponentLength { index: usize, got: usize, expected: usize },
    #[error("term {index}: coefficient is not finite")]
    NonFiniteCoefficient { index: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension must be at least 1")]
    EmptyDimension,
}

/// `Σ c_α z^α`, normalized: exponents distinct, sorted, no zero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    n: usize,
    terms: Vec<(Vec<u32>, Complex64)>,
}

impl PolyMap {
    pub fn new(n: usize, terms: Vec<(Vec<u32>, Complex64)>) -> Result<Self, PolyError> {
        if n == 0 {
            return Err(PolyError::EmptyDimension);
        }
        let mut merged: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (index, (exp, c)) in terms.into_iter().enumerate() {
            if exp.len() != n {
                return Err(PolyError::ExponentLength { index, got: exp.len(), expected: n });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(PolyError::NonFiniteCoefficient { index });
            }
            *merged.entry(exp).or_default() += c;
        }
        Ok(Self::from_map(n, merged))
    }

    fn from_map(n: usize, map: BTreeMap<Vec<u32>, Complex64>) -> Self {
        let terms = map.into_iter().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).collect();
        Self { n, terms }
    }

    pub fn zero(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self::monomial(vec![0; n], c)
    }

    pub fn monomial(exp: Vec<u32>, c: Complex64) -> Self {
        let n = exp.len();
        Self::from_map(n, BTreeMap::from([(exp, c)]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Vec<u32>, Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(exp, c)| {
                exp.iter().zip(z).fold(*c, |acc, (&e, &zj)| acc * zj.powu(e))
            })
            .sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let map = self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect();
        Self::from_map(self.n, map)
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &Self, s: Complex64) -> Result<Self, PolyError> {
        if self.n != other.n {
            return Err(PolyError::DimensionMismatch { left: self.n, right: other.n });
        }
        let mut map: BTreeMap<Vec<u32>, Complex64> = self.terms.iter().cloned().collect();
        for (e, c) in &other.terms {
            *map.entry(e.clone()).or_default() += c * s;
        }
        Ok(Self::from_map(self.n, map))
    }

    /// Reorders variables: variable `i` of the result is variable `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let map = self
            .terms
            .iter()
            .map(|(e, c)| (perm.iter().map(|&i| e[i]).collect(), *c))
            .collect();
        Self::from_map(self.n, map)
    }

    /// Order of vanishing along `z_j = 0`: the smallest exponent of `z_j` over
    /// all terms. `None` for the zero polynomial.
    pub fn order_along(&self, j: usize) -> Option<u32> {
        self.terms.iter().map(|(e, _)| e[j]).min()
    }

    /// True when `p(0, …, 0, z_{k+1}, …, z_n)` is identically zero, i.e. every
    /// term involves one of the first `k` variables.
    pub fn restriction_vanishes(&self, k: usize) -> bool {
        self.terms.iter().all(|(e, _)| e[..k].iter().any(|&x| x > 0))
    }
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for (j, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*z{}", j + 1)?,
                    _ => write!(f, "*z{}^{}", j + 1, k)?,
                }
            }
        }
        Ok(())
    }
}
