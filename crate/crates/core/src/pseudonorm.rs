//! The pseudonorm `⟨⟨η⟩⟩_m = Σ_V ∫ w_V |g_V|^{2/m} |Z|^{2B_V} dX dY` of a
//! section given chart by chart, and the metric it induces.
//!
//! A [`CoverModel`] fixes the charts: a nonnegative weight and a multi-index
//! `B` per chart, shared `n` and `m`. A [`SectionModel`] assigns a polynomial
//! numerator `g_V` to every chart; sections over one cover form a complex
//! vector space under chart-wise combination.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::charindex::MultiIndexPair;
use crate::integrator::{psi, IntegratorError, LocalIntegrand, QuadratureConfig};
use crate::poly::{PolyError, PolyMap};
use crate::quadrature::Estimate;
use crate::weight::{WeightError, WeightFn};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PseudonormError {
    #[error("m must be at least 3, got {0}")]
    BadM(u32),
    #[error("cover has no charts")]
    EmptyCover,
    #[error("chart id {0:?} declared twice")]
    DuplicateChart(String),
    #[error("chart {id:?}: B has length {got}, expected {expected}")]
    BLength { id: String, got: usize, expected: usize },
    #[error("chart {id:?}: {source}")]
    Weight { id: String, source: WeightError },
    #[error("section has {got} numerators for {expected} charts")]
    NumeratorCount { got: usize, expected: usize },
    #[error("chart {id:?}: numerator has dimension {got}, expected {expected}")]
    NumeratorDimension { id: String, got: usize, expected: usize },
    #[error("sections live on different covers")]
    CoverMismatch,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub id: String,
    pub weight: WeightFn,
    pub b: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverModel {
    m: u32,
    n: usize,
    charts: Vec<Chart>,
}

impl CoverModel {
    pub fn new(m: u32, n: usize, charts: Vec<Chart>) -> Result<Self, PseudonormError> {
        if m < 3 {
            return Err(PseudonormError::BadM(m));
        }
        if charts.is_empty() {
            return Err(PseudonormError::EmptyCover);
        }
        for (i, c) in charts.iter().enumerate() {
            if charts[..i].iter().any(|d| d.id == c.id) {
                return Err(PseudonormError::DuplicateChart(c.id.clone()));
            }
            if c.b.len() != n {
                return Err(PseudonormError::BLength { id: c.id.clone(), got: c.b.len(), expected: n });
            }
            c.weight.check_dim(n).map_err(|source| PseudonormError::Weight { id: c.id.clone(), source })?;
        }
        Ok(Self { m, n, charts })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    /// Ids of charts whose weight vanishes at the chart centre.
    pub fn weights_vanishing_at_origin(&self) -> Vec<&str> {
        self.charts.iter().filter(|c| c.weight.vanishes_at_origin(self.n)).map(|c| c.id.as_str()).collect()
    }

    /// The same cover with every chart's coordinates reordered.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let charts = self
            .charts
            .iter()
            .map(|c| Chart {
                id: c.id.clone(),
                weight: c.weight.permuted(perm),
                b: perm.iter().map(|&i| c.b[i]).collect(),
            })
            .collect();
        Self { m: self.m, n: self.n, charts }
    }
}

#[derive(Clone, Debug)]
pub struct SectionModel {
    cover: Arc<CoverModel>,
    numerators: Vec<PolyMap>,
}

impl SectionModel {
    pub fn new(cover: Arc<CoverModel>, numerators: Vec<PolyMap>) -> Result<Self, PseudonormError> {
        if numerators.len() != cover.charts.len() {
            return Err(PseudonormError::NumeratorCount {
                got: numerators.len(),
                expected: cover.charts.len(),
            });
        }
        for (c, g) in cover.charts.iter().zip(&numerators) {
            if g.dim() != cover.n {
                return Err(PseudonormError::NumeratorDimension {
                    id: c.id.clone(),
                    got: g.dim(),
                    expected: cover.n,
                });
            }
        }
        Ok(Self { cover, numerators })
    }

    pub fn zero(cover: Arc<CoverModel>) -> Self {
        let numerators = vec![PolyMap::zero(cover.n); cover.charts.len()];
        Self { cover, numerators }
    }

    pub fn cover(&self) -> &Arc<CoverModel> {
        &self.cover
    }

    pub fn numerators(&self) -> &[PolyMap] {
        &self.numerators
    }

    pub fn is_zero(&self) -> bool {
        self.numerators.iter().all(PolyMap::is_zero)
    }

    fn same_cover(&self, other: &Self) -> Result<(), PseudonormError> {
        if Arc::ptr_eq(&self.cover, &other.cover) || self.cover == other.cover {
            Ok(())
        } else {
            Err(PseudonormError::CoverMismatch)
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { cover: self.cover.clone(), numerators: self.numerators.iter().map(|g| g.scale(c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PseudonormError> {
        self.same_cover(other)?;
        let numerators = self.numerators.iter().zip(&other.numerators).map(|(x, y)| x.add(y)).collect::<Result<_, _>>()?;
        Ok(Self { cover: self.cover.clone(), numerators })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PseudonormError> {
        self.same_cover(other)?;
        let numerators = self.numerators.iter().zip(&other.numerators).map(|(x, y)| x.sub(y)).collect::<Result<_, _>>()?;
        Ok(Self { cover: self.cover.clone(), numerators })
    }

    /// The section on the permuted cover with every numerator permuted alike.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            cover: Arc::new(self.cover.permuted(perm)),
            numerators: self.numerators.iter().map(|g| g.permuted(perm)).collect(),
        }
    }
}

/// `∫ w |g|^{2/m} |Z|^{2B}` over one chart. The term of `g` with the largest
/// coefficient is taken as the reference monomial `c₀ Z^{k₀}`, so the integral
/// is `|c₀|^{2/m} Ψ(1)` for the local model with `A = k₀` and `φ = (g − c₀Z^{k₀})/c₀`.
pub fn chart_integral(
    g: &PolyMap,
    b: &[u32],
    m: u32,
    weight: &WeightFn,
    cfg: &QuadratureConfig,
) -> Result<Estimate<f64>, PseudonormError> {
    let Some((k0, c0)) = g
        .terms()
        .iter()
        .fold(None::<&(Vec<u32>, Complex64)>, |best, t| match best {
            Some(bt) if bt.1.norm() >= t.1.norm() => Some(bt),
            _ => Some(t),
        })
        .cloned()
    else {
        return Ok(Estimate::exact(0.0));
    };
    let rest = g.sub(&PolyMap::monomial(k0.clone(), c0))?.scale(c0.inv());
    let pair = MultiIndexPair::new(k0, b.to_vec()).map_err(IntegratorError::from)?;
    let local = LocalIntegrand::new(pair, m, rest, weight.clone())?;
    let e = psi(&local, Complex64::new(1.0, 0.0), cfg)?;
    Ok(e.scale(c0.norm().powf(2.0 / m as f64)))
}

/// `⟨⟨s⟩⟩_m`; charts are integrated in parallel and summed in chart order.
pub fn pseudonorm(s: &SectionModel, cfg: &QuadratureConfig) -> Result<Estimate<f64>, PseudonormError> {
    let cover = &s.cover;
    let parts = cover
        .charts
        .par_iter()
        .zip(s.numerators.par_iter())
        .map(|(c, g)| chart_integral(g, &c.b, cover.m, &c.weight, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(parts.into_iter().fold(Estimate::zero(), Estimate::plus))
}

pub fn distance(s1: &SectionModel, s2: &SectionModel, cfg: &QuadratureConfig) -> Result<Estimate<f64>, PseudonormError> {
    pseudonorm(&s1.sub(s2)?, cfg)
}

/// A law residual with the tolerance it should be compared against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub value: f64,
    /// Summed quadrature error estimates plus `rel_tol` times the magnitudes involved.
    pub tolerance: f64,
    pub exhausted: bool,
}

impl Residual {
    pub fn within_tolerance(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// `|⟨⟨c·s⟩⟩ − |c|^{2/m}⟨⟨s⟩⟩| / max(⟨⟨s⟩⟩, floor)`.
pub fn scaling_residual(s: &SectionModel, c: Complex64, cfg: &QuadratureConfig) -> Result<Residual, PseudonormError> {
    let base = pseudonorm(s, cfg)?;
    let scaled = pseudonorm(&s.scale(c), cfg)?;
    let factor = c.norm().powf(2.0 / s.cover.m as f64);
    let denom = base.value.max(cfg.abs_floor);
    Ok(Residual {
        value: (scaled.value - factor * base.value).abs() / denom,
        tolerance: (scaled.err + factor * base.err) / denom + 2.0 * cfg.rel_tol,
        exhausted: base.exhausted || scaled.exhausted,
    })
}

/// `⟨⟨s1 + s2⟩⟩ − ⟨⟨s1⟩⟩ − ⟨⟨s2⟩⟩`, nonpositive up to quadrature noise.
pub fn triangle_residual(s1: &SectionModel, s2: &SectionModel, cfg: &QuadratureConfig) -> Result<Residual, PseudonormError> {
    let sum = pseudonorm(&s1.add(s2)?, cfg)?;
    let a = pseudonorm(s1, cfg)?;
    let b = pseudonorm(s2, cfg)?;
    Ok(Residual {
        value: sum.value - a.value - b.value,
        tolerance: sum.err + a.err + b.err + cfg.rel_tol * (sum.value + a.value + b.value),
        exhausted: sum.exhausted || a.exhausted || b.exhausted,
    })
}
