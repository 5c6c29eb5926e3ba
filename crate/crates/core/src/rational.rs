//! Exact nonnegative rationals extended by a point at infinity.

use std::fmt;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

/// Exact rational used throughout the crate. `Ratio` keeps values in lowest
/// terms with a positive denominator, so equality is structural.
pub type Rational = Ratio<i128>;

/// A nonnegative rational or `+∞`.
///
/// The derived order places every finite value strictly below `Infinite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtRational {
    Finite(Rational),
    Infinite,
}

impl ExtRational {
    /// Builds `num/den`. Returns `None` for a zero denominator or a negative value.
    pub fn new(num: i128, den: i128) -> Option<Self> {
        if den == 0 {
            return None;
        }
        Self::from_rational(Rational::new(num, den))
    }

    pub fn from_rational(q: Rational) -> Option<Self> {
        if q < Rational::zero() {
            None
        } else {
            Some(ExtRational::Finite(q))
        }
    }

    pub fn integer(k: u64) -> Self {
        ExtRational::Finite(Rational::from_integer(k as i128))
    }

    /// The ratio `(b + 1) / a`, or infinity when `a == 0`.
    pub fn threshold(a: u32, b: u32) -> Self {
        if a == 0 {
            ExtRational::Infinite
        } else {
            ExtRational::Finite(Rational::new(b as i128 + 1, a as i128))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }

    pub fn finite(&self) -> Option<Rational> {
        match self {
            ExtRational::Finite(q) => Some(*q),
            ExtRational::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRational::Finite(q) => rational_to_f64(q),
            ExtRational::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(q) => write!(f, "{q}"),
            ExtRational::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for ExtRational {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "inf" {
            return Ok(ExtRational::Infinite);
        }
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: i128 = num.parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let den: i128 = den.parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        ExtRational::new(num, den).ok_or_else(|| format!("{s:?} is not a nonnegative rational"))
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    let n = q.numer().to_f64().unwrap_or(f64::NAN);
    let d = q.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_are_structural() {
        assert_eq!(ExtRational::new(10, 4), ExtRational::new(5, 2));
        let q = ExtRational::new(6, 9).unwrap().finite().unwrap();
        assert_eq!((*q.numer(), *q.denom()), (2, 3));
    }

    #[test]
    fn infinity_dominates() {
        assert!(ExtRational::Infinite > ExtRational::new(i64::MAX as i128, 1).unwrap());
        assert!(ExtRational::integer(0) < ExtRational::Infinite);
    }

    #[test]
    fn rejects_negative_and_zero_denominator() {
        assert_eq!(ExtRational::new(-1, 2), None);
        assert_eq!(ExtRational::new(1, 0), None);
        assert_eq!(ExtRational::new(1, -2), None);
    }

    #[test]
    fn threshold_matches_definition() {
        assert_eq!(ExtRational::threshold(0, 3), ExtRational::Infinite);
        assert_eq!(ExtRational::threshold(2, 0), ExtRational::new(1, 2).unwrap());
        assert_eq!(ExtRational::threshold(6, 4), ExtRational::new(5, 6).unwrap());
    }

    #[test]
    fn parse_and_display() {
        for s in ["5/6", "inf", "3", "0"] {
            let v: ExtRational = s.parse().unwrap();
            assert_eq!(v.to_string(), s);
        }
        assert!("-1/2".parse::<ExtRational>().is_err());
        assert!("1/0".parse::<ExtRational>().is_err());
    }
}
