//! The local model integral
//!
//! ```text
//! Ψ(t) = ∫_{|z_j| ≤ 1} χ · |Z^A + t φ(Z)|^{2/m} · |Z|^{2B} dX dY
//! ```
//!
//! evaluated in per-coordinate polar form `z_j = r_j e^{iθ_j}`.
//!
//! Writing `φ = Σ c_k Z^k`, the integrand depends on the angles only through
//! the characters `e^{i(k−A)·θ}`. Those differences span a lattice of some
//! rank `d ≤ n`, and the angular integral is taken over `T^d` in lattice
//! coordinates (see [`crate::lattice`]). For `t = 0` the integrand is a
//! product of one-dimensional radial factors. For `t ≠ 0` the difference
//! `Ψ(t) − Ψ(0)` is integrated directly so that it keeps relative accuracy
//! when it is many orders of magnitude below `Ψ(0)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

use crate::charindex::{CharIndexError, MultiIndexPair};
use crate::lattice::lattice_basis;
use crate::poly::PolyMap;
use crate::quadrature::{integrate, integrate_box, Estimate, GaussKronrod, Tolerance};
use crate::rational::Rational;
use crate::weight::{RadialFactor, WeightError, WeightFn};

const TAU: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegratorError {
    #[error("m must be at least 3, got {0}")]
    BadM(u32),
    #[error("polynomial has dimension {got}, expected {expected}")]
    PolyDimension { got: usize, expected: usize },
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Index(#[from] CharIndexError),
    #[error("t = {0} is not finite")]
    NonFiniteT(Complex64),
    #[error("invalid quadrature config: {0}")]
    Config(String),
}

/// Data of one local model: the exponent pair, `m`, the perturbation `φ` and the weight `χ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalIntegrand {
    pair: MultiIndexPair,
    m: u32,
    phi: PolyMap,
    chi: WeightFn,
}

impl LocalIntegrand {
    pub fn new(pair: MultiIndexPair, m: u32, phi: PolyMap, chi: WeightFn) -> Result<Self, IntegratorError> {
        if m < 3 {
            return Err(IntegratorError::BadM(m));
        }
        let n = pair.dim();
        if phi.dim() != n {
            return Err(IntegratorError::PolyDimension { got: phi.dim(), expected: n });
        }
        chi.check_dim(n)?;
        Ok(Self { pair, m, phi, chi })
    }

    pub fn pair(&self) -> &MultiIndexPair {
        &self.pair
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn phi(&self) -> &PolyMap {
        &self.phi
    }

    pub fn chi(&self) -> &WeightFn {
        &self.chi
    }

    pub fn dim(&self) -> usize {
        self.pair.dim()
    }

    pub fn with_phi(&self, phi: PolyMap) -> Result<Self, IntegratorError> {
        Self::new(self.pair.clone(), self.m, phi, self.chi.clone())
    }

    pub fn with_chi(&self, chi: WeightFn) -> Result<Self, IntegratorError> {
        Self::new(self.pair.clone(), self.m, self.phi.clone(), chi)
    }

    /// Coordinate `i` of the result is coordinate `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            pair: self.pair.permuted(perm),
            m: self.m,
            phi: self.phi.permuted(perm),
            chi: self.chi.permuted(perm),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    /// Kronrod points per radial panel (15, 21 or 31).
    pub radial_nodes: usize,
    /// Kronrod points per angular panel (15, 21 or 31).
    pub angular_nodes: usize,
    pub max_depth: u32,
    pub rel_tol: f64,
    pub abs_floor: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { radial_nodes: 21, angular_nodes: 21, max_depth: 50, rel_tol: 1e-8, abs_floor: 1e-30 }
    }
}

/// Panels allowed in a single one-dimensional pass.
const MAX_PANELS: usize = 4000;

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), IntegratorError> {
        for (name, k) in [("radial_nodes", self.radial_nodes), ("angular_nodes", self.angular_nodes)] {
            if GaussKronrod::with_points(k).is_none() {
                return Err(IntegratorError::Config(format!(
                    "{name} = {k}; supported values are {:?}",
                    GaussKronrod::SUPPORTED
                )));
            }
        }
        if self.max_depth == 0 {
            return Err(IntegratorError::Config("max_depth must be positive".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(IntegratorError::Config(format!("rel_tol = {} is outside (0, 1)", self.rel_tol)));
        }
        if !(self.abs_floor > 0.0 && self.abs_floor.is_finite()) {
            return Err(IntegratorError::Config(format!("abs_floor = {} must be positive", self.abs_floor)));
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance { rel: self.rel_tol, abs: self.abs_floor, max_depth: self.max_depth, max_panels: MAX_PANELS }
    }

    fn radial_rule(&self) -> GaussKronrod {
        GaussKronrod::with_points(self.radial_nodes).expect("validated")
    }

    fn angular_rule(&self) -> GaussKronrod {
        GaussKronrod::with_points(self.angular_nodes).expect("validated")
    }
}

/// `∏_j π / (a_j/m + b_j + 1)`, the value of `Ψ(0)` for `χ ≡ 1`.
pub fn psi_zero_closed_form(pair: &MultiIndexPair, m: u32) -> f64 {
    let m = m as f64;
    pair.a().iter().zip(pair.b()).map(|(&a, &b)| PI / (a as f64 / m + b as f64 + 1.0)).product()
}

/// `Ψ(t)`, computed as `Ψ(0)` plus the directly integrated difference.
pub fn psi(integrand: &LocalIntegrand, t: Complex64, cfg: &QuadratureConfig) -> Result<Estimate<f64>, IntegratorError> {
    let base = psi_at_zero(integrand, cfg)?;
    if t.is_zero() || integrand.phi.is_zero() {
        return Ok(base);
    }
    Ok(base.plus(psi_delta(integrand, t, cfg)?))
}

/// `Ψ(0)` by one-dimensional radial quadrature of each separable weight term.
pub fn psi_at_zero(integrand: &LocalIntegrand, cfg: &QuadratureConfig) -> Result<Estimate<f64>, IntegratorError> {
    cfg.validate()?;
    let m = integrand.m as f64;
    let (a, b) = (integrand.pair.a(), integrand.pair.b());
    let tol = cfg.tolerance();
    let rule = cfg.radial_rule();
    let mut total = Estimate::zero();
    for (coef, factors) in integrand.chi.separable_terms(integrand.dim()) {
        if coef == 0.0 {
            continue;
        }
        let mut term = Estimate::exact(coef);
        for (j, factor) in factors.iter().enumerate() {
            let s = 2.0 * a[j] as f64 / m + 2.0 * b[j] as f64 + 1.0;
            let mut f = |r: f64| Estimate::exact(factor.eval(r) * r.powf(s));
            let e = integrate(&mut f, 0.0, factor.support(), &rule, &tol).scale(TAU);
            term = product(term, e);
        }
        total = total.plus(term);
    }
    Ok(total)
}

fn product(x: Estimate<f64>, y: Estimate<f64>) -> Estimate<f64> {
    Estimate {
        value: x.value * y.value,
        err: x.err * y.value.abs() + y.err * x.value.abs() + x.err * y.err,
        evals: x.evals + y.evals,
        exhausted: x.exhausted || y.exhausted,
    }
}

/// One term `coef · r^exps · e^{i coords·ψ}` of `t·φ` with the `Z^A` term removed.
struct Wave {
    exps: Vec<u32>,
    coef: Complex64,
    coords: Vec<i64>,
}

/// `Ψ(t)` data after factoring out `e^{iA·θ}` and reducing the angles.
struct DeltaModel {
    a: Vec<u32>,
    b: Vec<u32>,
    inv_m: f64,
    chi: WeightFn,
    /// `1 + t·c_A`
    base: Complex64,
    /// `|1 + t·c_A|^{2/m} − 1`
    base_shift: f64,
    waves: Vec<Wave>,
    rank: usize,
}

impl DeltaModel {
    fn new(integrand: &LocalIntegrand, t: Complex64) -> Self {
        let n = integrand.dim();
        let a = integrand.pair.a().to_vec();
        let mut c_a = Complex64::zero();
        let mut rest = Vec::new();
        for (exps, c) in integrand.phi.terms() {
            if exps.as_slice() == a.as_slice() {
                c_a = *c;
            } else {
                rest.push((exps.clone(), t * c));
            }
        }
        let diffs: Vec<Vec<i64>> = rest
            .iter()
            .map(|(k, _)| k.iter().zip(&a).map(|(&kj, &aj)| kj as i64 - aj as i64).collect())
            .collect();
        let lattice = lattice_basis(&diffs, n);
        let waves = rest
            .into_iter()
            .zip(lattice.coords)
            .map(|((exps, coef), coords)| Wave { exps, coef, coords })
            .collect();
        let inv_m = 1.0 / integrand.m as f64;
        let tc = t * c_a;
        let q = 2.0 * tc.re + tc.norm_sqr();
        Self {
            a,
            b: integrand.pair.b().to_vec(),
            inv_m,
            chi: integrand.chi.clone(),
            base: Complex64::new(1.0, 0.0) + tc,
            base_shift: (q.ln_1p() * inv_m).exp_m1(),
            waves,
            rank: lattice.basis.len(),
        }
    }

    /// `∫_{T^n} (|Z^A + tφ|^{2/m} − |Z^A|^{2/m}) dθ` at fixed radii, times the radial density.
    fn radial_integrand(
        &self,
        r: &[f64],
        rule: &GaussKronrod,
        tol: &Tolerance,
        scratch: &mut Vec<Complex64>,
    ) -> Estimate<f64> {
        let n = r.len();
        let mut density = self.chi.eval(r);
        if density == 0.0 {
            return Estimate::zero();
        }
        let mut ra = 1.0;
        for ((rj, &a), &b) in r.iter().zip(&self.a).zip(&self.b) {
            density *= rj.powi(2 * b as i32 + 1);
            ra *= rj.powi(a as i32);
        }
        let p0 = ra.powf(2.0 * self.inv_m);
        let constant = TAU.powi(n as i32) * p0 * self.base_shift;
        if self.rank == 0 {
            return Estimate::exact(density * constant);
        }
        scratch.clear();
        let mut spread = 0.0;
        for w in &self.waves {
            let mut mag = 1.0;
            for (rj, &k) in r.iter().zip(&w.exps) {
                mag *= rj.powi(k as i32);
            }
            let c = w.coef * mag;
            spread += c.norm();
            scratch.push(c);
        }
        let reference = self.base * ra;
        let ref_abs = reference.norm();
        let ref_pow = p0 * (1.0 + self.base_shift);
        let second_order = ref_abs > 0.0 && spread <= 0.5 * ref_abs;
        let inv_ref = if ref_abs > 0.0 { reference.inv() } else { Complex64::zero() };
        let inv_m = self.inv_m;
        let waves = &self.waves;
        let coefs: &[Complex64] = scratch;
        let mut leaf = |psi: &[f64]| {
            let mut w = Complex64::zero();
            for (wave, c) in waves.iter().zip(coefs) {
                let angle: f64 = wave.coords.iter().zip(psi).map(|(&k, &x)| k as f64 * x).sum();
                w += c * Complex64::from_polar(1.0, angle);
            }
            let v = if second_order {
                ref_pow * second_order_remainder(w * inv_ref, inv_m)
            } else {
                (reference + w).norm_sqr().powf(inv_m) - ref_pow
            };
            Estimate::exact(v)
        };
        let bounds = vec![(0.0, TAU); self.rank];
        let rules = vec![*rule; self.rank];
        let angular = integrate_box(&mut leaf, &bounds, &rules, tol);
        angular.scale(TAU.powi((n - self.rank) as i32)).plus(Estimate::exact(constant)).scale(density)
    }
}

/// `|1 + z|^{2/m} − 1 − (2/m) Re z`, accurate for small `z`.
fn second_order_remainder(z: Complex64, inv_m: f64) -> f64 {
    let abs2 = z.norm_sqr();
    let q = 2.0 * z.re + abs2;
    if q.abs() >= 0.1 {
        return (q.ln_1p() * inv_m).exp_m1() - 2.0 * inv_m * z.re;
    }
    // (1+q)^{1/m} − 1 − q/m as a binomial series
    let mut coef = inv_m;
    let mut power = q;
    let mut tail = 0.0;
    for k in 2..60 {
        coef *= (inv_m - (k - 1) as f64) / k as f64;
        power *= q;
        let term = coef * power;
        tail += term;
        if term.abs() <= 1e-18 * tail.abs() {
            break;
        }
    }
    abs2 * inv_m + tail
}

/// `Ψ(t) − Ψ(0)`, integrated directly.
pub fn psi_delta(integrand: &LocalIntegrand, t: Complex64, cfg: &QuadratureConfig) -> Result<Estimate<f64>, IntegratorError> {
    cfg.validate()?;
    if !(t.re.is_finite() && t.im.is_finite()) {
        return Err(IntegratorError::NonFiniteT(t));
    }
    if t.is_zero() || integrand.phi.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let model = DeltaModel::new(integrand, t);
    let n = integrand.dim();
    let tol = cfg.tolerance();
    let bounds: Vec<(f64, f64)> = integrand.chi.support(n).into_iter().map(|s| (0.0, s)).collect();
    let mut leaf_tol = tol;
    for &(lo, hi) in &bounds {
        leaf_tol = leaf_tol.inner(hi - lo);
    }
    let rules = vec![cfg.radial_rule(); n];
    let angular_rule = cfg.angular_rule();
    let mut scratch = Vec::with_capacity(model.waves.len());
    let mut leaf = |r: &[f64]| model.radial_integrand(r, &angular_rule, &leaf_tol, &mut scratch);
    Ok(integrate_box(&mut leaf, &bounds, &rules, &tol))
}

/// Rank of the lattice spanned by the exponent differences `k − A` of `φ`:
/// the number of angles the integrand of `Ψ(t)` depends on.
pub fn angular_rank(integrand: &LocalIntegrand) -> usize {
    DeltaModel::new(integrand, Complex64::new(1.0, 0.0)).rank
}

/// A coordinate along which the pairing integrand fails to be integrable.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceWitness {
    pub coordinate: usize,
    /// Exponent `s` of `r_j^s dr_j` near `r_j = 0`; divergence means `s ≤ −1`.
    pub exponent: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pairing {
    Value(Estimate<Complex64>),
    Divergent(DivergenceWitness),
}

/// Order of the weight along `r_j = 0`, as a power of `r_j`.
fn weight_order(chi: &WeightFn, j: usize, n: usize) -> u32 {
    chi.separable_terms(n)
        .iter()
        .filter(|(c, _)| *c != 0.0)
        .map(|(_, fs)| match fs[j] {
            RadialFactor::EvenPower(k) => 2 * k,
            _ => 0,
        })
        .min()
        .unwrap_or(0)
}

fn check_pairing_inputs(base: &LocalIntegrand, phi1: &PolyMap, phi2: &PolyMap) -> Result<(), IntegratorError> {
    let n = base.dim();
    for p in [phi1, phi2] {
        if p.dim() != n {
            return Err(IntegratorError::PolyDimension { got: p.dim(), expected: n });
        }
    }
    Ok(())
}

/// Exact integrability test for the pairing integrand
/// `φ₁ φ̄₂ |Z^A|^{2/m−2} |Z|^{2B} χ`: along each `r_j → 0` the modulus behaves
/// like `r_j^s` (with the area factor included) and the integral converges iff
/// every such `s > −1`.
pub fn pairing_divergence(
    base: &LocalIntegrand,
    phi1: &PolyMap,
    phi2: &PolyMap,
) -> Result<Option<DivergenceWitness>, IntegratorError> {
    check_pairing_inputs(base, phi1, phi2)?;
    let n = base.dim();
    let m = base.m as i128;
    for j in 0..n {
        let (Some(o1), Some(o2)) = (phi1.order_along(j), phi2.order_along(j)) else {
            return Ok(None);
        };
        let a = base.pair.a()[j] as i128;
        let b = base.pair.b()[j] as i128;
        let s = Rational::from_integer((o1 + o2 + weight_order(&base.chi, j, n)) as i128 + 2 * b + 1)
            + Rational::new(2 * a * (1 - m), m);
        if s <= Rational::from_integer(-1) {
            return Ok(Some(DivergenceWitness { coordinate: j, exponent: s }));
        }
    }
    Ok(None)
}

/// `∫ φ₁ φ̄₂ |Z^A|^{2/m−2} |Z|^{2B} χ dX dY`, or a divergence witness.
///
/// Angular integration leaves only the diagonal terms `c_k d̄_k`; each radial
/// factor `∫ f(r) r^s dr` is computed in the variable `u = r^{s+1}`, which
/// removes the endpoint singularity.
pub fn hermitian_pairing(
    base: &LocalIntegrand,
    phi1: &PolyMap,
    phi2: &PolyMap,
    cfg: &QuadratureConfig,
) -> Result<Pairing, IntegratorError> {
    cfg.validate()?;
    if let Some(w) = pairing_divergence(base, phi1, phi2)? {
        return Ok(Pairing::Divergent(w));
    }
    let n = base.dim();
    let m = base.m as f64;
    let tol = cfg.tolerance();
    let rule = cfg.radial_rule();
    let weight_terms = base.chi.separable_terms(n);
    let mut total: Estimate<Complex64> = Estimate::zero();
    for (k, c1) in phi1.terms() {
        let Some((_, c2)) = phi2.terms().iter().find(|(e, _)| e == k) else {
            continue;
        };
        let coef = c1 * c2.conj();
        let mut radial = Estimate::zero();
        for (wc, factors) in &weight_terms {
            let mut term = Estimate::exact(*wc * TAU.powi(n as i32));
            for (j, factor) in factors.iter().enumerate() {
                let a = base.pair.a()[j] as f64;
                let b = base.pair.b()[j] as f64;
                let s = 2.0 * k[j] as f64 + 2.0 * a * (1.0 / m - 1.0) + 2.0 * b + 1.0;
                term = product(term, power_moment(factor, s, &rule, &tol));
            }
            radial = radial.plus(term);
        }
        total = total.plus(Estimate {
            value: coef * radial.value,
            err: coef.norm() * radial.err,
            evals: radial.evals,
            exhausted: radial.exhausted,
        });
    }
    Ok(Pairing::Value(total))
}

/// `∫_0^ρ f(r) r^s dr` for `s > −1` via `u = r^{s+1}`.
fn power_moment(f: &RadialFactor, s: f64, rule: &GaussKronrod, tol: &Tolerance) -> Estimate<f64> {
    let e = s + 1.0;
    let upper = f.support().powf(e);
    let mut g = |u: f64| Estimate::exact(f.eval(u.powf(1.0 / e)));
    integrate(&mut g, 0.0, upper, rule, tol).scale(1.0 / e)
}

/// The pairing integral restricted to `r_j ≥ ε` in every coordinate, for each
/// cutoff, integrated in the original radial variables. A convergent pairing
/// gives values that settle as `ε → 0`; a divergent one grows without bound.
pub fn pairing_truncations(
    base: &LocalIntegrand,
    phi1: &PolyMap,
    phi2: &PolyMap,
    cutoffs: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<Estimate<Complex64>>, IntegratorError> {
    cfg.validate()?;
    check_pairing_inputs(base, phi1, phi2)?;
    let n = base.dim();
    let m = base.m as f64;
    let tol = cfg.tolerance();
    let rule = cfg.radial_rule();
    let weight_terms = base.chi.separable_terms(n);
    let mut out = Vec::with_capacity(cutoffs.len());
    for &eps in cutoffs {
        let mut total: Estimate<Complex64> = Estimate::zero();
        for (k, c1) in phi1.terms() {
            let Some((_, c2)) = phi2.terms().iter().find(|(e, _)| e == k) else {
                continue;
            };
            let coef = c1 * c2.conj();
            let mut radial = Estimate::zero();
            for (wc, factors) in &weight_terms {
                let mut term = Estimate::exact(*wc * TAU.powi(n as i32));
                for (j, factor) in factors.iter().enumerate() {
                    let a = base.pair.a()[j] as f64;
                    let b = base.pair.b()[j] as f64;
                    let s = 2.0 * k[j] as f64 + 2.0 * a * (1.0 / m - 1.0) + 2.0 * b + 1.0;
                    let mut g = |r: f64| Estimate::exact(factor.eval(r) * r.powf(s));
                    let hi = factor.support();
                    let piece = if eps < hi { integrate(&mut g, eps, hi, &rule, &tol) } else { Estimate::zero() };
                    term = product(term, piece);
                }
                radial = radial.plus(term);
            }
            total = total.plus(Estimate {
                value: coef * radial.value,
                err: coef.norm() * radial.err,
                evals: radial.evals,
                exhausted: radial.exhausted,
            });
        }
        out.push(total);
    }
    Ok(out)
}
