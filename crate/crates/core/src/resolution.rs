//! Singularity invariants read off a declarative simple-normal-crossing model.
//!
//! A [`ResolutionModel`] lists the prime divisors `E` of a log resolution with
//! their coefficients `a_E` (in the pullback of `D`) and `b_E` (in the relative
//! canonical divisor), the nonempty intersection strata, and for each stratum
//! the base points its image contains. Points are abstract identifiers: only
//! incidence enters the invariants.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::charindex::CharIndex;
use crate::rational::{ExtRational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolutionError {
    #[error("divisor id {0:?} declared twice")]
    DuplicateDivisor(String),
    #[error("point id {0:?} declared twice")]
    DuplicatePoint(String),
    #[error("divisor {0:?} has a = 0; coefficients in the pullback must be positive")]
    ZeroMultiplicity(String),
    #[error("stratum #{index} has an empty divisor set")]
    EmptyStratum { index: usize },
    #[error("stratum #{index} has an empty image")]
    EmptyImage { index: usize },
    #[error("stratum #{index} references undeclared divisor {id:?}")]
    UnknownStratumDivisor { index: usize, id: String },
    #[error("stratum #{index} references undeclared point {id:?}")]
    UnknownStratumPoint { index: usize, id: String },
    #[error("strata #{first} and #{second} have the same divisor set")]
    DuplicateStratum { first: usize, second: usize },
    #[error("divisor {0:?} has no singleton stratum (its image is undeclared)")]
    MissingImage(String),
    #[error("stratum #{index} {divisors:?}: face {face:?} is missing")]
    MissingFace { index: usize, divisors: Vec<String>, face: Vec<String> },
    #[error("stratum #{index} {divisors:?}: face {face:?} does not contain point {point:?}")]
    FaceImageTooSmall { index: usize, divisors: Vec<String>, face: Vec<String>, point: String },
    #[error("stratum #{index} has {size} divisors; at most {max} are supported")]
    StratumTooLarge { index: usize, size: usize, max: usize },
    #[error("unknown point id {0:?}")]
    UnknownPoint(String),
    #[error("log canonical multiplicity is undefined at {0:?}: no divisor passes through it")]
    UndefinedMultiplicity(String),
    #[error("model has no divisors")]
    NoDivisors,
    #[error("multiplicity must be positive")]
    ZeroAssertedMultiplicity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divisor {
    pub id: String,
    pub a: u32,
    pub b: u32,
}

impl Divisor {
    pub fn ratio(&self) -> Rational {
        Rational::new(self.b as i128 + 1, self.a as i128)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    pub divisors: BTreeSet<String>,
    pub image: BTreeSet<String>,
}

/// Faces of strata larger than this are not enumerated during validation.
pub const MAX_STRATUM_SIZE: usize = 16;

/// Validated resolution data. Immutable once built.
#[derive(Clone, Debug)]
pub struct ResolutionModel {
    divisors: Vec<Divisor>,
    strata: Vec<Stratum>,
    points: BTreeSet<String>,
    by_set: BTreeMap<BTreeSet<String>, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointIndexReport {
    pub point: String,
    pub lct: ExtRational,
    pub mu: u32,
}

impl PointIndexReport {
    pub fn index(&self) -> CharIndex {
        CharIndex { l: self.lct, mu: self.mu }
    }
}

impl ResolutionModel {
    pub fn new(
        divisors: Vec<Divisor>,
        strata: Vec<Stratum>,
        points: Vec<String>,
    ) -> Result<Self, ResolutionError> {
        let mut div_ids = BTreeSet::new();
        for d in &divisors {
            if !div_ids.insert(d.id.clone()) {
                return Err(ResolutionError::DuplicateDivisor(d.id.clone()));
            }
            if d.a == 0 {
                return Err(ResolutionError::ZeroMultiplicity(d.id.clone()));
            }
        }
        let mut point_set = BTreeSet::new();
        for p in &points {
            if !point_set.insert(p.clone()) {
                return Err(ResolutionError::DuplicatePoint(p.clone()));
            }
        }

        let mut by_set = BTreeMap::new();
        for (index, s) in strata.iter().enumerate() {
            if s.divisors.is_empty() {
                return Err(ResolutionError::EmptyStratum { index });
            }
            if s.image.is_empty() {
                return Err(ResolutionError::EmptyImage { index });
            }
            if s.divisors.len() > MAX_STRATUM_SIZE {
                return Err(ResolutionError::StratumTooLarge {
                    index,
                    size: s.divisors.len(),
                    max: MAX_STRATUM_SIZE,
                });
            }
            if let Some(id) = s.divisors.iter().find(|id| !div_ids.contains(*id)) {
                return Err(ResolutionError::UnknownStratumDivisor { index, id: id.clone() });
            }
            if let Some(id) = s.image.iter().find(|id| !point_set.contains(*id)) {
                return Err(ResolutionError::UnknownStratumPoint { index, id: id.clone() });
            }
            if let Some(&first) = by_set.get(&s.divisors) {
                return Err(ResolutionError::DuplicateStratum { first, second: index });
            }
            by_set.insert(s.divisors.clone(), index);
        }

        for d in &divisors {
            if !by_set.contains_key(&BTreeSet::from([d.id.clone()])) {
                return Err(ResolutionError::MissingImage(d.id.clone()));
            }
        }

        // every nonempty face of a stratum is a stratum whose image is at least as large
        for (index, s) in strata.iter().enumerate() {
            let members: Vec<&String> = s.divisors.iter().collect();
            let k = members.len();
            for mask in 1u32..(1u32 << k) - 1 {
                let face: BTreeSet<String> = (0..k)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| members[i].clone())
                    .collect();
                let Some(&fi) = by_set.get(&face) else {
                    return Err(ResolutionError::MissingFace {
                        index,
                        divisors: s.divisors.iter().cloned().collect(),
                        face: face.into_iter().collect(),
                    });
                };
                if let Some(p) = s.image.iter().find(|p| !strata[fi].image.contains(*p)) {
                    return Err(ResolutionError::FaceImageTooSmall {
                        index,
                        divisors: s.divisors.iter().cloned().collect(),
                        face: face.into_iter().collect(),
                        point: p.clone(),
                    });
                }
            }
        }

        Ok(Self { divisors, strata, points: point_set, by_set })
    }

    pub fn divisors(&self) -> &[Divisor] {
        &self.divisors
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn points(&self) -> impl Iterator<Item = &str> {
        self.points.iter().map(String::as_str)
    }

    /// The stratum with exactly this divisor set, if declared.
    pub fn stratum_for(&self, divisors: &BTreeSet<String>) -> Option<&Stratum> {
        self.by_set.get(divisors).map(|&i| &self.strata[i])
    }

    fn divisor_image(&self, d: &Divisor) -> &BTreeSet<String> {
        &self.strata[self.by_set[&BTreeSet::from([d.id.clone()])]].image
    }

    fn check_point(&self, x: &str) -> Result<(), ResolutionError> {
        if self.points.contains(x) {
            Ok(())
        } else {
            Err(ResolutionError::UnknownPoint(x.to_string()))
        }
    }

    pub fn global_lct(&self) -> ExtRational {
        self.divisors
            .iter()
            .map(|d| ExtRational::Finite(d.ratio()))
            .min()
            .unwrap_or(ExtRational::Infinite)
    }

    pub fn local_lct(&self, x: &str) -> Result<ExtRational, ResolutionError> {
        self.check_point(x)?;
        Ok(self
            .divisors
            .iter()
            .filter(|d| self.divisor_image(d).contains(x))
            .map(|d| ExtRational::Finite(d.ratio()))
            .min()
            .unwrap_or(ExtRational::Infinite))
    }

    pub fn local_mu(&self, x: &str) -> Result<u32, ResolutionError> {
        let lct = match self.local_lct(x)? {
            ExtRational::Finite(q) => q,
            ExtRational::Infinite => return Err(ResolutionError::UndefinedMultiplicity(x.into())),
        };
        let achieving: BTreeSet<&str> = self
            .divisors
            .iter()
            .filter(|d| d.ratio() == lct)
            .map(|d| d.id.as_str())
            .collect();
        let q = self
            .strata
            .iter()
            .filter(|s| s.image.contains(x))
            .filter(|s| s.divisors.iter().all(|id| achieving.contains(id.as_str())))
            .map(|s| s.divisors.len())
            .max()
            .unwrap_or(0);
        Ok(q as u32)
    }

    /// The pair `(lct(D, x), μ(D, x))`, with `(∞, 0)` off the divisor.
    pub fn local_index(&self, x: &str) -> Result<PointIndexReport, ResolutionError> {
        let lct = self.local_lct(x)?;
        let mu = if lct.is_finite() { self.local_mu(x)? } else { 0 };
        Ok(PointIndexReport { point: x.to_string(), lct, mu })
    }

    pub fn point_reports(&self) -> Vec<PointIndexReport> {
        self.points
            .iter()
            .map(|p| self.local_index(p).expect("declared point"))
            .collect()
    }

    /// Global characteristic index and the set of points attaining it.
    pub fn characteristic_indicatrix(
        &self,
    ) -> Result<(CharIndex, BTreeSet<String>), ResolutionError> {
        if self.divisors.is_empty() {
            return Err(ResolutionError::NoDivisors);
        }
        let reports = self.point_reports();
        let best = reports.iter().map(PointIndexReport::index).max().unwrap_or(CharIndex::EMPTY);
        let points = reports
            .into_iter()
            .filter(|r| r.index() == best)
            .map(|r| r.point)
            .collect();
        Ok((best, points))
    }

    /// `μ(D)` and `C(D)` computed from the strata of lct-achieving divisors:
    /// the largest stratum size among them, and the union of the images of
    /// strata of that size.
    pub fn indicatrix_from_strata(
        &self,
    ) -> Result<(CharIndex, BTreeSet<String>), ResolutionError> {
        let lct = match self.global_lct() {
            ExtRational::Finite(q) => q,
            ExtRational::Infinite => return Err(ResolutionError::NoDivisors),
        };
        let achieving: BTreeSet<&str> = self
            .divisors
            .iter()
            .filter(|d| d.ratio() == lct)
            .map(|d| d.id.as_str())
            .collect();
        let candidates: Vec<&Stratum> = self
            .strata
            .iter()
            .filter(|s| s.divisors.iter().all(|id| achieving.contains(id.as_str())))
            .collect();
        let mu = candidates.iter().map(|s| s.divisors.len()).max().unwrap_or(0);
        let points = candidates
            .iter()
            .filter(|s| s.divisors.len() == mu)
            .flat_map(|s| s.image.iter().cloned())
            .collect();
        Ok((CharIndex { l: ExtRational::Finite(lct), mu: mu as u32 }, points))
    }

    /// Audits `lct(D, x) <= n / mult` for a user-asserted multiplicity of `D` at `x`.
    pub fn mult_bound_check(&self, x: &str, mult: u32, n: u32) -> Result<bool, ResolutionError> {
        if mult == 0 {
            return Err(ResolutionError::ZeroAssertedMultiplicity);
        }
        let bound = ExtRational::Finite(Rational::new(n as i128, mult as i128));
        Ok(self.local_lct(x)? <= bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    fn div(id: &str, a: u32, b: u32) -> Divisor {
        Divisor { id: id.into(), a, b }
    }

    fn stratum(ds: &[&str], ps: &[&str]) -> Stratum {
        Stratum { divisors: set(ds), image: set(ps) }
    }

    fn pts(ps: &[&str]) -> Vec<String> {
        ps.iter().map(|s| s.to_string()).collect()
    }

    fn q(n: i128, d: i128) -> ExtRational {
        ExtRational::new(n, d).unwrap()
    }

    fn two_lines() -> ResolutionModel {
        ResolutionModel::new(
            vec![div("E1", 1, 0), div("E2", 1, 0)],
            vec![
                stratum(&["E1"], &["p", "q"]),
                stratum(&["E2"], &["p", "r"]),
                stratum(&["E1", "E2"], &["p"]),
            ],
            pts(&["p", "q", "r", "s"]),
        )
        .unwrap()
    }

    fn cusp() -> ResolutionModel {
        ResolutionModel::new(
            vec![div("C", 1, 0), div("E1", 2, 1), div("E2", 3, 2), div("E3", 6, 4)],
            vec![
                stratum(&["C"], &["p", "q"]),
                stratum(&["E1"], &["p"]),
                stratum(&["E2"], &["p"]),
                stratum(&["E3"], &["p"]),
                stratum(&["C", "E3"], &["p"]),
                stratum(&["E1", "E3"], &["p"]),
                stratum(&["E2", "E3"], &["p"]),
            ],
            pts(&["p", "q"]),
        )
        .unwrap()
    }

    #[test]
    fn global_lct_examples() {
        let smooth =
            ResolutionModel::new(vec![div("D", 1, 0)], vec![stratum(&["D"], &["p"])], pts(&["p"]))
                .unwrap();
        assert_eq!(smooth.global_lct(), q(1, 1));
        assert_eq!(cusp().global_lct(), q(5, 6));
        let empty = ResolutionModel::new(vec![], vec![], pts(&["p"])).unwrap();
        assert_eq!(empty.global_lct(), ExtRational::Infinite);
    }

    #[test]
    fn local_lct_examples() {
        let smooth = ResolutionModel::new(
            vec![div("D", 1, 0)],
            vec![stratum(&["D"], &["p"])],
            pts(&["p", "q"]),
        )
        .unwrap();
        assert_eq!(smooth.local_lct("p").unwrap(), q(1, 1));
        assert_eq!(smooth.local_lct("q").unwrap(), ExtRational::Infinite);
        assert_eq!(cusp().local_lct("p").unwrap(), q(5, 6));
        assert_eq!(cusp().local_lct("q").unwrap(), q(1, 1));

        let disjoint = ResolutionModel::new(
            vec![div("P", 2, 0), div("Q", 3, 0)],
            vec![stratum(&["P"], &["p"]), stratum(&["Q"], &["q"])],
            pts(&["p", "q"]),
        )
        .unwrap();
        assert_eq!(disjoint.local_lct("p").unwrap(), q(1, 2));
        assert_eq!(disjoint.local_lct("q").unwrap(), q(1, 3));
        assert_eq!(
            disjoint.local_lct("zz"),
            Err(ResolutionError::UnknownPoint("zz".into()))
        );
    }

    #[test]
    fn local_mu_examples() {
        let m = two_lines();
        assert_eq!(m.local_mu("p").unwrap(), 2);
        assert_eq!(m.local_mu("q").unwrap(), 1);
        assert!(matches!(m.local_mu("s"), Err(ResolutionError::UndefinedMultiplicity(_))));
        let smooth =
            ResolutionModel::new(vec![div("D", 1, 0)], vec![stratum(&["D"], &["p"])], pts(&["p"]))
                .unwrap();
        assert_eq!(smooth.local_mu("p").unwrap(), 1);
    }

    #[test]
    fn indicatrix_examples() {
        let (idx, pts_) = two_lines().characteristic_indicatrix().unwrap();
        assert_eq!(idx, CharIndex { l: q(1, 1), mu: 2 });
        assert_eq!(pts_, set(&["p"]));

        let smooth = ResolutionModel::new(
            vec![div("D", 1, 0)],
            vec![stratum(&["D"], &["p", "q"])],
            pts(&["p", "q"]),
        )
        .unwrap();
        let (idx, pts_) = smooth.characteristic_indicatrix().unwrap();
        assert_eq!(idx, CharIndex { l: q(1, 1), mu: 1 });
        assert_eq!(pts_, set(&["p", "q"]));

        // only E3 achieves 5/6, so the cusp's index is (5/6, 1) at p
        let (idx, pts_) = cusp().characteristic_indicatrix().unwrap();
        assert_eq!(idx, CharIndex { l: q(5, 6), mu: 1 });
        assert_eq!(pts_, set(&["p"]));
        assert_eq!(cusp().indicatrix_from_strata().unwrap(), (idx, pts_));

        let empty = ResolutionModel::new(vec![], vec![], pts(&["p"])).unwrap();
        assert_eq!(empty.characteristic_indicatrix(), Err(ResolutionError::NoDivisors));
    }

    #[test]
    fn mult_bound_examples() {
        let smooth =
            ResolutionModel::new(vec![div("D", 1, 0)], vec![stratum(&["D"], &["p"])], pts(&["p"]))
                .unwrap();
        assert!(smooth.mult_bound_check("p", 1, 2).unwrap());

        let monomial = ResolutionModel::new(
            vec![div("H1", 2, 0), div("H2", 2, 0)],
            vec![
                stratum(&["H1"], &["p"]),
                stratum(&["H2"], &["p"]),
                stratum(&["H1", "H2"], &["p"]),
            ],
            pts(&["p"]),
        )
        .unwrap();
        assert!(monomial.mult_bound_check("p", 4, 2).unwrap());
        assert!(!monomial.mult_bound_check("p", 5, 2).unwrap());
        assert!(cusp().mult_bound_check("p", 2, 2).unwrap());
        assert!(cusp().mult_bound_check("nowhere", 2, 2).is_err());
    }

    #[test]
    fn validation_diagnostics() {
        let err = ResolutionModel::new(vec![div("E", 1, 0)], vec![], pts(&["p"])).unwrap_err();
        assert_eq!(err, ResolutionError::MissingImage("E".into()));

        let err = ResolutionModel::new(
            vec![div("E1", 1, 0), div("E2", 1, 0)],
            vec![stratum(&["E1"], &["p"]), stratum(&["E1", "E2"], &["p"])],
            pts(&["p"]),
        )
        .unwrap_err();
        assert_eq!(err, ResolutionError::MissingImage("E2".into()));

        let err = ResolutionModel::new(
            vec![div("E1", 1, 0), div("E2", 1, 0), div("E3", 1, 0)],
            vec![
                stratum(&["E1"], &["p"]),
                stratum(&["E2"], &["p"]),
                stratum(&["E3"], &["p"]),
                stratum(&["E1", "E3"], &["p"]),
                stratum(&["E2", "E3"], &["p"]),
                stratum(&["E1", "E2", "E3"], &["p"]),
            ],
            pts(&["p"]),
        )
        .unwrap_err();
        match err {
            ResolutionError::MissingFace { face, .. } => assert_eq!(face, vec!["E1", "E2"]),
            other => panic!("unexpected {other:?}"),
        }

        let err = ResolutionModel::new(
            vec![div("E1", 1, 0), div("E2", 1, 0)],
            vec![
                stratum(&["E1"], &["p"]),
                stratum(&["E2"], &["q"]),
                stratum(&["E1", "E2"], &["p"]),
            ],
            pts(&["p", "q"]),
        )
        .unwrap_err();
        assert!(matches!(err, ResolutionError::FaceImageTooSmall { .. }));

        let err = ResolutionModel::new(vec![div("E", 0, 0)], vec![], pts(&[])).unwrap_err();
        assert_eq!(err, ResolutionError::ZeroMultiplicity("E".into()));

        let err = ResolutionModel::new(
            vec![div("E", 1, 0)],
            vec![stratum(&["E"], &["nowhere"])],
            pts(&["p"]),
        )
        .unwrap_err();
        assert!(matches!(err, ResolutionError::UnknownStratumPoint { .. }));
    }
}
