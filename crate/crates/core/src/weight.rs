//! Nonnegative weight functions on the closed unit polydisc.
//!
//! Every family here depends on the point only through the coordinate radii
//! `r_j = |z_j|`, and every member is a finite sum of products of per-coordinate
//! factors. The integrator relies on both facts.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("constant weight must be finite and nonnegative, got {0}")]
    BadConstant(f64),
    #[error("term {index}: exponent vector has length {got}, expected {expected}")]
    ExponentLength { index: usize, got: usize, expected: usize },
    #[error("term {index}: coefficient is not finite")]
    NonFiniteCoefficient { index: usize },
    #[error("radial polynomial is negative ({value}) at radii {at:?}")]
    Negative { value: f64, at: Vec<f64> },
    #[error("bump radius {0} outside (0, 1]")]
    BadRadius(f64),
    #[error("bump scale must be finite and positive, got {0}")]
    BadScale(f64),
    #[error("weight has dimension {weight}, integrand has dimension {expected}")]
    DimensionMismatch { weight: usize, expected: usize },
    #[error("dimension must be at least 1")]
    EmptyDimension,
}

/// One coordinate's factor in a separable weight term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialFactor {
    One,
    /// `r^(2k)`
    EvenPower(u32),
    /// `exp(1 - 1/(1 - (r/ρ)^2))` on `r < ρ`, zero beyond.
    Bump(f64),
}

impl RadialFactor {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialFactor::One => 1.0,
            RadialFactor::EvenPower(k) => r.powi(2 * k as i32),
            RadialFactor::Bump(rho) => bump(r, rho),
        }
    }

    /// Radius beyond which the factor vanishes (capped at 1).
    pub fn support(&self) -> f64 {
        match *self {
            RadialFactor::Bump(rho) => rho.min(1.0),
            _ => 1.0,
        }
    }
}

fn bump(r: f64, rho: f64) -> f64 {
    let s = r / rho;
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightFn {
    Constant(f64),
    /// `Σ c ∏ r_j^(2 e_j)` with real coefficients.
    RadialPolynomial { n: usize, terms: Vec<(Vec<u32>, f64)> },
    /// `scale · ∏ bump(r_j; ρ_j)`.
    SeparableBump { scale: f64, radii: Vec<f64> },
}

impl WeightFn {
    pub fn constant(c: f64) -> Result<Self, WeightError> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(WeightError::BadConstant(c));
        }
        Ok(WeightFn::Constant(c))
    }

    pub fn radial_polynomial(n: usize, terms: Vec<(Vec<u32>, f64)>) -> Result<Self, WeightError> {
        if n == 0 {
            return Err(WeightError::EmptyDimension);
        }
        for (index, (e, c)) in terms.iter().enumerate() {
            if e.len() != n {
                return Err(WeightError::ExponentLength { index, got: e.len(), expected: n });
            }
            if !c.is_finite() {
                return Err(WeightError::NonFiniteCoefficient { index });
            }
        }
        let w = WeightFn::RadialPolynomial { n, terms };
        w.check_nonnegative_on_grid()?;
        Ok(w)
    }

    pub fn separable_bump(scale: f64, radii: Vec<f64>) -> Result<Self, WeightError> {
        if radii.is_empty() {
            return Err(WeightError::EmptyDimension);
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(WeightError::BadScale(scale));
        }
        if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return Err(WeightError::BadRadius(r));
        }
        Ok(WeightFn::SeparableBump { scale, radii })
    }

    /// Nonnegativity of a radial polynomial is audited on a tensor grid of radii.
    fn check_nonnegative_on_grid(&self) -> Result<(), WeightError> {
        let WeightFn::RadialPolynomial { n, .. } = self else {
            return Ok(());
        };
        let per_axis: usize = if *n <= 3 { 17 } else { 5 };
        let total = per_axis.pow(*n as u32);
        let mut radii = vec![0.0; *n];
        for idx in 0..total {
            let mut k = idx;
            for r in radii.iter_mut() {
                *r = (k % per_axis) as f64 / (per_axis - 1) as f64;
                k /= per_axis;
            }
            let v = self.eval(&radii);
            if v < -1e-12 {
                return Err(WeightError::Negative { value: v, at: radii.clone() });
            }
        }
        Ok(())
    }

    /// Declared dimension; `None` for constants, which fit any dimension.
    pub fn dim(&self) -> Option<usize> {
        match self {
            WeightFn::Constant(_) => None,
            WeightFn::RadialPolynomial { n, .. } => Some(*n),
            WeightFn::SeparableBump { radii, .. } => Some(radii.len()),
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<(), WeightError> {
        match self.dim() {
            Some(d) if d != n => Err(WeightError::DimensionMismatch { weight: d, expected: n }),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, radii: &[f64]) -> f64 {
        match self {
            WeightFn::Constant(c) => *c,
            WeightFn::RadialPolynomial { terms, .. } => terms
                .iter()
                .map(|(e, c)| e.iter().zip(radii).fold(*c, |acc, (&k, &r)| acc * r.powi(2 * k as i32)))
                .sum(),
            WeightFn::SeparableBump { scale, radii: rho } => {
                rho.iter().zip(radii).fold(*scale, |acc, (&p, &r)| acc * bump(r, p))
            }
        }
    }

    pub fn at_origin(&self, n: usize) -> f64 {
        self.eval(&vec![0.0; n])
    }

    /// True when the weight vanishes at the origin, which a chart weight of a
    /// partition of unity centred there must not do.
    pub fn vanishes_at_origin(&self, n: usize) -> bool {
        self.at_origin(n) == 0.0
    }

    /// The weight as `Σ coefficient · ∏_j factor_j(r_j)` in dimension `n`.
    pub fn separable_terms(&self, n: usize) -> Vec<(f64, Vec<RadialFactor>)> {
        match self {
            WeightFn::Constant(c) => vec![(*c, vec![RadialFactor::One; n])],
            WeightFn::RadialPolynomial { terms, .. } => terms
                .iter()
                .map(|(e, c)| {
                    let fs = e
                        .iter()
                        .map(|&k| if k == 0 { RadialFactor::One } else { RadialFactor::EvenPower(k) })
                        .collect();
                    (*c, fs)
                })
                .collect(),
            WeightFn::SeparableBump { scale, radii } => {
                vec![(*scale, radii.iter().map(|&r| RadialFactor::Bump(r)).collect())]
            }
        }
    }

    /// Per-coordinate radius beyond which the weight vanishes.
    pub fn support(&self, n: usize) -> Vec<f64> {
        match self {
            WeightFn::SeparableBump { radii, .. } => radii.clone(),
            _ => vec![1.0; n],
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        match self {
            WeightFn::Constant(c) => WeightFn::Constant(c * s),
            WeightFn::RadialPolynomial { n, terms } => WeightFn::RadialPolynomial {
                n: *n,
                terms: terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
            },
            WeightFn::SeparableBump { scale, radii } => {
                WeightFn::SeparableBump { scale: scale * s, radii: radii.clone() }
            }
        }
    }

    /// The weight with coordinates reordered by `perm` (see `PolyMap::permuted`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        match self {
            WeightFn::Constant(c) => WeightFn::Constant(*c),
            WeightFn::RadialPolynomial { n, terms } => WeightFn::RadialPolynomial {
                n: *n,
                terms: terms
                    .iter()
                    .map(|(e, c)| (perm.iter().map(|&i| e[i]).collect(), *c))
                    .collect(),
            },
            WeightFn::SeparableBump { scale, radii } => WeightFn::SeparableBump {
                scale: *scale,
                radii: perm.iter().map(|&i| radii[i]).collect(),
            },
        }
    }
}
