//! Small-parameter behaviour of `Ψ(t) − Ψ(0)`.
//!
//! For a local model with index `(l, μ)` and `m > 2` the difference behaves
//! like `c · |t|^{2l + 2/m} · (ln 1/|t|)^{μ−1}` when `2l + 2/m < 1`, with
//! `c ≥ 0` vanishing exactly when `φ(0, …, 0, z_{μ+1}, …, z_n) ≡ 0` in a
//! coordinate order that lists the minimizing coordinates first. When
//! `2l + 2/m ≥ 1` it is `O(|t| (ln 1/|t|)^μ)`. This module samples the
//! difference on geometric grids, fits the power-log model, and sums chart
//! contributions into a global expansion.

use std::io;
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::charindex::{canonical_chart_order, local_char_index, CharIndex, MultiIndexPair};
use crate::integrator::{psi_delta, IntegratorError, LocalIntegrand, QuadratureConfig};
use crate::poly::PolyMap;
use crate::rational::{rational_to_f64, Rational};
use crate::report::fmt_f64;

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("m must be at least 3, got {0}")]
    BadM(u32),
    #[error("the pair has no finite threshold; there is no expansion to classify")]
    NoFiniteThreshold,
    #[error("mu = {mu} is outside 1..={n}")]
    BadMu { mu: u32, n: usize },
    #[error("sweep: {0}")]
    Sweep(String),
    #[error("samples: {0}")]
    Samples(String),
    #[error("only {usable} usable samples (|delta| above 10x its error estimate); at least 4 are needed")]
    InsufficientSignal { usable: usize },
    #[error("deltas change sign inside the fit window")]
    MixedSign,
    #[error("empty log-power grid")]
    EmptyGrid,
    #[error("charts disagree on m ({0} vs {1})")]
    MixedM(u32, u32),
    #[error("cover has no charts")]
    EmptyCover,
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExpansionCase {
    /// `2l + 2/m ≥ 1`
    Case1,
    /// `2l + 2/m < 1`
    Case2,
}

impl ExpansionCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExpansionCase::Case1 => "case1",
            ExpansionCase::Case2 => "case2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseClassification {
    pub case: ExpansionCase,
    pub l: Rational,
    pub mu: u32,
    /// `2l + 2/m`
    pub exponent: Rational,
}

pub fn classify_case(pair: &MultiIndexPair, m: u32) -> Result<CaseClassification, AsymptoticsError> {
    if m < 3 {
        return Err(AsymptoticsError::BadM(m));
    }
    let idx = local_char_index(pair);
    let l = idx.l.finite().ok_or(AsymptoticsError::NoFiniteThreshold)?;
    let exponent = l * 2 + Rational::new(2, m as i128);
    let case = if exponent >= Rational::from_integer(1) { ExpansionCase::Case1 } else { ExpansionCase::Case2 };
    Ok(CaseClassification { case, l, mu: idx.mu, exponent })
}

/// True iff every term of `phi` involves one of the first `mu` variables, i.e.
/// `phi(0, …, 0, z_{mu+1}, …, z_n) ≡ 0`. The coordinates must already be in
/// canonical chart order.
pub fn coefficient_vanishes(phi: &PolyMap, mu: u32) -> Result<bool, AsymptoticsError> {
    if mu == 0 || mu as usize > phi.dim() {
        return Err(AsymptoticsError::BadMu { mu, n: phi.dim() });
    }
    Ok(phi.restriction_vanishes(mu as usize))
}

/// [`coefficient_vanishes`] after reordering the integrand's coordinates into
/// canonical chart order.
pub fn coefficient_vanishes_canonical(integrand: &LocalIntegrand) -> Result<bool, AsymptoticsError> {
    let idx = local_char_index(integrand.pair());
    if idx.is_empty() {
        return Err(AsymptoticsError::NoFiniteThreshold);
    }
    let perm = canonical_chart_order(integrand.pair());
    coefficient_vanishes(&integrand.phi().permuted(&perm), idx.mu)
}

/// A geometric sweep `t_k = t0 · ratio^k · e^{iθ}`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub t0: f64,
    pub ratio: f64,
    pub count: usize,
    #[serde(default)]
    pub theta: f64,
}

impl SweepParams {
    pub fn new(t0: f64, ratio: f64, count: usize) -> Self {
        Self { t0, ratio, count, theta: 0.0 }
    }

    pub fn validate(&self) -> Result<(), AsymptoticsError> {
        let upper = (-1.0f64).exp();
        if !(self.t0 > 0.0 && self.t0 < upper) {
            return Err(AsymptoticsError::Sweep(format!("t0 = {} must lie in (0, 1/e)", self.t0)));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(AsymptoticsError::Sweep(format!("ratio = {} must lie in (0, 1)", self.ratio)));
        }
        if self.count < 4 {
            return Err(AsymptoticsError::Sweep(format!("count = {} must be at least 4", self.count)));
        }
        if !self.theta.is_finite() {
            return Err(AsymptoticsError::Sweep("theta must be finite".into()));
        }
        if self.t0 * self.ratio.powi(self.count as i32 - 1) <= 0.0 {
            return Err(AsymptoticsError::Sweep("grid underflows to zero".into()));
        }
        Ok(())
    }

    /// The moduli `|t_k|`.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.t0 * self.ratio.powi(k as i32)).collect()
    }
}

/// Sampled differences `Ψ(t_k) − Ψ(0)` at strictly decreasing `|t_k| < 1/e`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiSamples {
    t_values: Vec<f64>,
    delta_values: Vec<f64>,
    err_ests: Vec<f64>,
    exhausted: Vec<bool>,
}

impl PsiSamples {
    pub fn new(
        t_values: Vec<f64>,
        delta_values: Vec<f64>,
        err_ests: Vec<f64>,
        exhausted: Vec<bool>,
    ) -> Result<Self, AsymptoticsError> {
        let n = t_values.len();
        if delta_values.len() != n || err_ests.len() != n || exhausted.len() != n {
            return Err(AsymptoticsError::Samples("column lengths differ".into()));
        }
        let upper = (-1.0f64).exp();
        for (k, &t) in t_values.iter().enumerate() {
            if !(t > 0.0 && t < upper) {
                return Err(AsymptoticsError::Samples(format!("t[{k}] = {t} is outside (0, 1/e)")));
            }
            if k > 0 && t >= t_values[k - 1] {
                return Err(AsymptoticsError::Samples(format!("t[{k}] = {t} does not decrease")));
            }
        }
        if let Some(k) = delta_values.iter().position(|d| !d.is_finite()) {
            return Err(AsymptoticsError::Samples(format!("delta[{k}] is not finite")));
        }
        if let Some(k) = err_ests.iter().position(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(AsymptoticsError::Samples(format!("err[{k}] is not a nonnegative number")));
        }
        Ok(Self { t_values, delta_values, err_ests, exhausted })
    }

    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t_values
    }

    pub fn delta_values(&self) -> &[f64] {
        &self.delta_values
    }

    pub fn err_ests(&self) -> &[f64] {
        &self.err_ests
    }

    pub fn exhausted(&self) -> &[bool] {
        &self.exhausted
    }

    pub fn any_exhausted(&self) -> bool {
        self.exhausted.iter().any(|&x| x)
    }

    /// Pointwise sum of two sweeps over the same grid.
    pub fn sum(&self, other: &Self) -> Result<Self, AsymptoticsError> {
        if self.t_values != other.t_values {
            return Err(AsymptoticsError::Samples("cannot add sweeps over different grids".into()));
        }
        let zip = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a + b).collect::<Vec<_>>();
        Ok(Self {
            t_values: self.t_values.clone(),
            delta_values: zip(&self.delta_values, &other.delta_values),
            err_ests: zip(&self.err_ests, &other.err_ests),
            exhausted: self.exhausted.iter().zip(&other.exhausted).map(|(a, b)| *a || *b).collect(),
        })
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), AsymptoticsError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "delta", "err_est", "exhausted"])?;
        for k in 0..self.len() {
            out.write_record([
                fmt_f64(self.t_values[k]),
                fmt_f64(self.delta_values[k]),
                fmt_f64(self.err_ests[k]),
                self.exhausted[k].to_string(),
            ])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads the format written by [`PsiSamples::write_csv`]. Lines starting
    /// with `#` are skipped and the `exhausted` column is optional.
    pub fn read_csv<R: io::Read>(r: R) -> Result<Self, AsymptoticsError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Row {
            t: f64,
            delta: f64,
            err_est: f64,
            #[serde(default)]
            exhausted: bool,
        }
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(r);
        let (mut t, mut d, mut e, mut x) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for row in reader.deserialize() {
            let row: Row = row?;
            t.push(row.t);
            d.push(row.delta);
            e.push(row.err_est);
            x.push(row.exhausted);
        }
        Self::new(t, d, e, x)
    }
}

/// Evaluates `Ψ(t_k) − Ψ(0)` on the sweep grid, samples in parallel.
pub fn sample_psi(
    integrand: &LocalIntegrand,
    sweep: &SweepParams,
    cfg: &QuadratureConfig,
) -> Result<PsiSamples, AsymptoticsError> {
    sweep.validate()?;
    cfg.validate()?;
    let grid = sweep.grid();
    let phase = Complex64::from_polar(1.0, sweep.theta);
    let estimates = grid
        .par_iter()
        .map(|&t| psi_delta(integrand, phase * t, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    PsiSamples::new(
        grid,
        estimates.iter().map(|e| e.value).collect(),
        estimates.iter().map(|e| e.err).collect(),
        estimates.iter().map(|e| e.exhausted).collect(),
    )
}

/// Least-squares fit of `ln|δ| = ln c + α ln t + p ln ln(1/t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticFitResult {
    pub c_hat: f64,
    pub alpha_hat: f64,
    pub p_hat: u32,
    pub residual_rms: f64,
    pub case: Option<ExpansionCase>,
    pub window: Range<usize>,
}

/// Samples whose `|δ|` exceeds ten times the error estimate.
pub fn usable_window(samples: &PsiSamples) -> Range<usize> {
    let ok: Vec<bool> = samples
        .delta_values
        .iter()
        .zip(&samples.err_ests)
        .map(|(d, e)| d.abs() > 10.0 * e && *d != 0.0)
        .collect();
    let mut best = 0..0;
    let mut k = 0;
    while k < ok.len() {
        if !ok[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < ok.len() && ok[k] {
            k += 1;
        }
        if k - start > best.len() {
            best = start..k;
        }
    }
    best
}

fn fit_window(samples: &PsiSamples, window: &Range<usize>, p: u32) -> AsymptoticFitResult {
    let ts = &samples.t_values[window.clone()];
    let ds = &samples.delta_values[window.clone()];
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = ts.iter().zip(ds).map(|(t, d)| d.abs().ln() - p as f64 * (1.0 / t).ln().ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - alpha * x).powi(2)).sum();
    AsymptoticFitResult {
        c_hat: ds[0].signum() * intercept.exp(),
        alpha_hat: alpha,
        p_hat: p,
        residual_rms: (rss / k).sqrt(),
        case: None,
        window: window.clone(),
    }
}

fn checked_window(samples: &PsiSamples) -> Result<Range<usize>, AsymptoticsError> {
    let window = usable_window(samples);
    if window.len() < 4 {
        return Err(AsymptoticsError::InsufficientSignal { usable: window.len() });
    }
    let ds = &samples.delta_values[window.clone()];
    if ds.iter().any(|d| d.signum() != ds[0].signum()) {
        return Err(AsymptoticsError::MixedSign);
    }
    Ok(window)
}

/// Fits every log power in `p_grid` and keeps the one with the smallest
/// residual (the smaller power on ties).
pub fn fit_expansion(samples: &PsiSamples, p_grid: &[u32]) -> Result<AsymptoticFitResult, AsymptoticsError> {
    if p_grid.is_empty() {
        return Err(AsymptoticsError::EmptyGrid);
    }
    let window = checked_window(samples)?;
    let mut grid = p_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let mut best: Option<AsymptoticFitResult> = None;
    for p in grid {
        let fit = fit_window(samples, &window, p);
        if best.as_ref().is_none_or(|b| fit.residual_rms < b.residual_rms) {
            best = Some(fit);
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// The fit with the log power held at `p`.
pub fn fit_fixed_log_power(samples: &PsiSamples, p: u32) -> Result<AsymptoticFitResult, AsymptoticsError> {
    let window = checked_window(samples)?;
    Ok(fit_window(samples, &window, p))
}

/// The default log-power grid `{0, …, n−1}`.
pub fn default_p_grid(n: usize) -> Vec<u32> {
    (0..n as u32).collect()
}

/// Ratios `|δ(t)| / (t (ln 1/t)^μ)`; bounded along the sweep in case 1.
pub fn case1_ratios(samples: &PsiSamples, mu: u32) -> Vec<f64> {
    samples
        .t_values
        .iter()
        .zip(&samples.delta_values)
        .map(|(t, d)| d.abs() / (t * (1.0 / t).ln().powi(mu as i32)))
        .collect()
}

/// One chart's share of a global expansion.
#[derive(Clone, Debug)]
pub struct ChartContribution {
    pub id: String,
    pub index: CharIndex,
    pub maximal: bool,
    pub samples: PsiSamples,
    /// `None` when the chart's own sweep carries too little signal to fit.
    pub fit: Option<AsymptoticFitResult>,
}

#[derive(Clone, Debug)]
pub struct GlobalExpansion {
    pub index: CharIndex,
    pub classification: CaseClassification,
    pub samples: PsiSamples,
    pub fit: AsymptoticFitResult,
    pub charts: Vec<ChartContribution>,
}

impl GlobalExpansion {
    /// `2l + 2/m` for the global index, as a float.
    pub fn expected_alpha(&self) -> f64 {
        rational_to_f64(&self.classification.exponent)
    }

    /// Sum of the individually fitted coefficients of the maximal charts.
    pub fn maximal_c_sum(&self) -> Option<f64> {
        self.charts.iter().filter(|c| c.maximal).map(|c| c.fit.as_ref().map(|f| f.c_hat)).sum()
    }
}

/// Sweeps every chart over one grid, sums the sweeps and fits the sum.
pub fn global_expansion(
    cover: &[(String, LocalIntegrand)],
    sweep: &SweepParams,
    cfg: &QuadratureConfig,
    p_grid: &[u32],
) -> Result<GlobalExpansion, AsymptoticsError> {
    let (_, first) = cover.first().ok_or(AsymptoticsError::EmptyCover)?;
    let m = first.m();
    if let Some((_, other)) = cover.iter().find(|(_, c)| c.m() != m) {
        return Err(AsymptoticsError::MixedM(m, other.m()));
    }
    let indices: Vec<CharIndex> = cover.iter().map(|(_, c)| local_char_index(c.pair())).collect();
    let index = *indices.iter().max().expect("cover is nonempty");
    if index.is_empty() {
        return Err(AsymptoticsError::NoFiniteThreshold);
    }
    let maximal_pos = indices.iter().position(|i| *i == index).expect("max is attained");
    let classification = classify_case(cover[maximal_pos].1.pair(), m)?;

    let mut charts = Vec::with_capacity(cover.len());
    let mut total: Option<PsiSamples> = None;
    for ((id, integrand), idx) in cover.iter().zip(&indices) {
        let samples = sample_psi(integrand, sweep, cfg)?;
        total = Some(match total {
            None => samples.clone(),
            Some(acc) => acc.sum(&samples)?,
        });
        let fit = fit_expansion(&samples, p_grid).ok();
        charts.push(ChartContribution { id: id.clone(), index: *idx, maximal: *idx == index, samples, fit });
    }
    let samples = total.expect("cover is nonempty");
    let mut fit = fit_expansion(&samples, p_grid)?;
    fit.case = Some(classification.case);
    Ok(GlobalExpansion { index, classification, samples, fit, charts })
}
