//! Exact arithmetic behind the effective constants: multiplicity thresholds
//! `2nr/(r−2)`, the additivity inequality that glues them, the semigroup
//! generated by `{ab | a ≥ 5, b ≥ 6}`, and freeness degrees `2(n+2)!(a+n)`.

use num_traits::Zero;
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("n must be at least 1")]
    BadDimension,
    #[error("r = {0} is below 3")]
    SmallR(u64),
    #[error("inputs must be at least 3, got ({0}, {1})")]
    SmallPair(u64, u64),
    #[error("semigroup table limit {0} is below 100")]
    SmallLimit(usize),
    #[error("a = {0} is below 2")]
    SmallA(u64),
    #[error("m = {0} is below 1")]
    SmallM(u64),
    #[error("the surface path needs n = 2, got {0}")]
    SurfaceDimension(u64),
    #[error("integer overflow")]
    Overflow,
}

fn rat(x: u64) -> Rational {
    Rational::from_integer(x as i128)
}

/// `2nr / (r − 2)`.
pub fn mult_threshold(n: u64, r: u64) -> Result<Rational, BoundsError> {
    if n == 0 {
        return Err(BoundsError::BadDimension);
    }
    if r < 3 {
        return Err(BoundsError::SmallR(r));
    }
    Ok(Rational::new(2 * n as i128 * r as i128, r as i128 - 2))
}

/// Whether `(x+y)/(x+y−2) < x/(x−2) + y/(y−2)`, with the exact gap
/// `x/(x−2) + y/(y−2) − (x+y)/(x+y−2)`.
pub fn semigroup_inequality_check(x: u64, y: u64) -> Result<(bool, Rational), BoundsError> {
    if x < 3 || y < 3 {
        return Err(BoundsError::SmallPair(x, y));
    }
    let f = |v: u64| Rational::new(v as i128, v as i128 - 2);
    let gap = f(x) + f(y) - f(x + y);
    Ok((gap > Rational::zero(), gap))
}

/// Membership of `1..=limit` in the additive semigroup generated by the
/// products `ab` with `a ≥ 5`, `b ≥ 6`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemigroupTable {
    limit: usize,
    /// `member[k]` for `k` in `0..=limit`; `member[0]` is unused and false.
    member: Vec<bool>,
    minimal_generators: Vec<usize>,
}

pub const GENERATORS_RULE: &str = "products ab with a>=5, b>=6";

pub fn surface_semigroup(limit: usize) -> Result<SemigroupTable, BoundsError> {
    if limit < 100 {
        return Err(BoundsError::SmallLimit(limit));
    }
    let mut product = vec![false; limit + 1];
    for a in 5..=limit / 6 {
        for b in 6..=limit / a {
            product[a * b] = true;
        }
    }
    // a generator is needed only when it is not already a sum of smaller members
    let mut member = vec![false; limit + 1];
    let mut minimal: Vec<usize> = Vec::new();
    for k in 1..=limit {
        let sum = minimal.iter().any(|&g| g < k && member[k - g]);
        if sum {
            member[k] = true;
        } else if product[k] {
            member[k] = true;
            minimal.push(k);
        }
    }
    Ok(SemigroupTable { limit, member, minimal_generators: minimal })
}

impl SemigroupTable {
    pub fn limit(&self) -> usize {
        self.limit
    }

    /// `None` outside `1..=limit`.
    pub fn contains(&self, k: usize) -> Option<bool> {
        (1..=self.limit).contains(&k).then(|| self.member[k])
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.limit).filter(|&k| self.member[k])
    }

    pub fn gaps(&self) -> Vec<usize> {
        (1..=self.limit).filter(|&k| !self.member[k]).collect()
    }

    pub fn minimal_generators(&self) -> &[usize] {
        &self.minimal_generators
    }

    /// The least `c` with every `k` in `c..=limit` a member.
    pub fn conductor(&self) -> usize {
        (1..=self.limit).rev().find(|&k| !self.member[k]).map_or(1, |g| g + 1)
    }

    /// First violation of `x, y ∈ S, x + y ≤ limit ⇒ x + y ∈ S`, checked for
    /// every pair with word-parallel bit shifts.
    pub fn closure_violation(&self) -> Option<(usize, usize)> {
        let words = self.limit / 64 + 1;
        let mut bits = vec![0u64; words];
        for k in self.members() {
            bits[k / 64] |= 1 << (k % 64);
        }
        for x in self.members() {
            // shifted[k] = bits[k - x]
            let (ws, bs) = (x / 64, x % 64);
            for w in ws..words {
                let lo = bits[w - ws] << bs;
                let hi = if bs > 0 && w > ws { bits[w - ws - 1] >> (64 - bs) } else { 0 };
                let mut shifted = lo | hi;
                if w == words - 1 {
                    let top = self.limit % 64;
                    shifted &= if top == 63 { u64::MAX } else { (1u64 << (top + 1)) - 1 };
                }
                let missing = shifted & !bits[w];
                if missing != 0 {
                    let k = w * 64 + missing.trailing_zeros() as usize;
                    return Some((x, k - x));
                }
            }
        }
        None
    }
}

/// `2 (n+2)! (a+n)`.
pub fn kollar_free_degree(n: u64, a: u64) -> Result<u128, BoundsError> {
    if n == 0 {
        return Err(BoundsError::BadDimension);
    }
    if a < 2 {
        return Err(BoundsError::SmallA(a));
    }
    let fact = factorial(n + 2)?;
    fact.checked_mul(2)
        .and_then(|x| x.checked_mul(a as u128 + n as u128))
        .ok_or(BoundsError::Overflow)
}

fn factorial(k: u64) -> Result<u128, BoundsError> {
    (1..=k as u128).try_fold(1u128, |acc, x| acc.checked_mul(x)).ok_or(BoundsError::Overflow)
}

/// The power-section multiplicity test for `ν m ∈ S_M`:
/// `ν > 2nνm/(νm − 2)`, which is equivalent to `ν > 2n + 2/m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerMultiplicityCheck {
    pub nu: u64,
    pub m: u64,
    pub n: u64,
    /// `2nνm / (νm − 2)`
    pub rhs: Rational,
    pub holds: bool,
    /// `ν ≥ 2n + 1`
    pub non_strict_reading: bool,
    /// `ν > 2n + 1`
    pub strict_reading: bool,
    /// `ν = 2n + 1`, where the two readings disagree.
    pub boundary: bool,
}

pub fn power_multiplicity_check(nu: u64, m: u64, n: u64) -> Result<PowerMultiplicityCheck, BoundsError> {
    if n == 0 {
        return Err(BoundsError::BadDimension);
    }
    if m == 0 {
        return Err(BoundsError::SmallM(m));
    }
    let nm = nu as i128 * m as i128;
    if nm <= 2 {
        return Err(BoundsError::SmallR(nm as u64));
    }
    let rhs = Rational::new(2 * n as i128 * nm, nm - 2);
    Ok(PowerMultiplicityCheck {
        nu,
        m,
        n,
        rhs,
        holds: rat(nu) > rhs,
        non_strict_reading: nu > 2 * n,
        strict_reading: nu > 2 * n + 1,
        boundary: nu == 2 * n + 1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundsPath {
    /// Dimension two with the Bombieri–Kodaira freeness constants.
    Surface,
    /// Any dimension with Kollár's freeness degree.
    General,
}

impl BoundsPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundsPath::Surface => "surface",
            BoundsPath::General => "general",
        }
    }
}

impl std::str::FromStr for BoundsPath {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "surface" => Ok(BoundsPath::Surface),
            "general" => Ok(BoundsPath::General),
            other => Err(format!("unknown bounds path {other:?} (expected surface or general)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsReport {
    pub n: u64,
    pub path: BoundsPath,
    /// `|m d K|` is free for `m ≥ m0`.
    pub d: u128,
    pub m0: u64,
    /// Smallest `ν` allowed by the non-strict reading, `2n + 1`.
    pub nu_min: u64,
    /// Smallest `ν` allowed by the strict reading, `2n + 2`.
    pub nu_min_strict: u64,
    /// Known only on the surface path.
    pub r0: Option<u64>,
    /// Why `r0` is missing, when it is.
    pub r0_note: Option<String>,
}

pub fn bounds_report(n: u64, path: BoundsPath) -> Result<BoundsReport, BoundsError> {
    if n == 0 {
        return Err(BoundsError::BadDimension);
    }
    let (d, m0, r0, r0_note) = match path {
        BoundsPath::Surface => {
            if n != 2 {
                return Err(BoundsError::SurfaceDimension(n));
            }
            (1, 5, Some(75), None)
        }
        BoundsPath::General => (
            factorial(n + 2)?.checked_mul(2).ok_or(BoundsError::Overflow)?,
            n + 2,
            None,
            Some(
                "depends on the birationality threshold m_n, which has no explicit value; \
                 r0 follows from choosing distinct primes m, m' >= max(m_n/d, m0) and nu, nu' > 2n+1"
                    .to_string(),
            ),
        ),
    };
    Ok(BoundsReport { n, path, d, m0, nu_min: 2 * n + 1, nu_min_strict: 2 * n + 2, r0, r0_note })
}

impl BoundsReport {
    /// The multiplicity test at `ν = 2n + 1` and `m = m0`.
    pub fn boundary_check(&self) -> Result<PowerMultiplicityCheck, BoundsError> {
        power_multiplicity_check(self.nu_min, self.m0, self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_examples() {
        assert_eq!(mult_threshold(2, 10).unwrap(), rat(5));
        assert_eq!(mult_threshold(1, 3).unwrap(), rat(6));
        let t = mult_threshold(1, 2002).unwrap();
        assert_eq!(t, Rational::new(4004, 2000));
        assert!(t > rat(2));
        assert_eq!(mult_threshold(1, 2), Err(BoundsError::SmallR(2)));
    }

    #[test]
    fn inequality_examples() {
        assert_eq!(semigroup_inequality_check(3, 3).unwrap(), (true, Rational::new(9, 2)));
        let (ok, gap) = semigroup_inequality_check(3, 1000).unwrap();
        assert!(ok && gap > Rational::zero());
        assert_eq!(semigroup_inequality_check(2, 5), Err(BoundsError::SmallPair(2, 5)));
    }

    #[test]
    fn semigroup_small_facts() {
        let s = surface_semigroup(200).unwrap();
        assert_eq!(s.contains(30), Some(true));
        assert_eq!(s.contains(74), Some(false));
        assert_eq!(s.conductor(), 75);
        assert_eq!(s.contains(0), None);
        assert_eq!(s.closure_violation(), None);
        assert_eq!(s.minimal_generators()[0], 30);
        assert!(surface_semigroup(99).is_err());
    }

    #[test]
    fn closure_violation_is_detected() {
        let mut s = surface_semigroup(200).unwrap();
        s.member[60] = false;
        assert_eq!(s.closure_violation(), Some((30, 30)));
    }

    #[test]
    fn kollar_examples() {
        assert_eq!(kollar_free_degree(2, 2).unwrap(), 192);
        assert_eq!(kollar_free_degree(1, 2).unwrap(), 36);
        assert_eq!(kollar_free_degree(3, 5).unwrap(), 1920);
        assert_eq!(kollar_free_degree(2, 1), Err(BoundsError::SmallA(1)));
        assert_eq!(kollar_free_degree(40, 2), Err(BoundsError::Overflow));
    }

    #[test]
    fn report_examples() {
        let r = bounds_report(2, BoundsPath::Surface).unwrap();
        assert_eq!((r.d, r.m0, r.r0), (1, 5, Some(75)));
        let r = bounds_report(2, BoundsPath::General).unwrap();
        assert_eq!((r.d, r.m0, r.r0), (48, 4, None));
        let r = bounds_report(3, BoundsPath::General).unwrap();
        assert_eq!((r.d, r.m0), (240, 5));
        assert_eq!(bounds_report(3, BoundsPath::Surface), Err(BoundsError::SurfaceDimension(3)));
    }

    #[test]
    fn power_multiplicity_boundary() {
        // ν = 2n+1 passes the inequality for every m ≥ 3 but only the non-strict reading admits it
        for m in 3..20 {
            let c = power_multiplicity_check(5, m, 2).unwrap();
            assert!(c.holds && c.boundary && c.non_strict_reading && !c.strict_reading);
        }
        // at m = 2 the boundary value is exactly 2n + 1 = ν, so the strict inequality fails
        let c = power_multiplicity_check(5, 2, 2).unwrap();
        assert_eq!(c.rhs, rat(5));
        assert!(!c.holds);
    }
}
