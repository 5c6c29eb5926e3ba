//! The declarative scenario format.
//!
//! A scenario is a TOML document with a `schema` id, a `kind` tag and a body
//! whose shape depends on the kind. Unknown keys are rejected. Complex numbers
//! are `[re, im]` pairs and exponent vectors are integer arrays. Parse errors
//! and most validation errors carry the line and column of the offending item.
//!
//! ```toml
//! schema = "plurinorm.scenario/v1"
//! kind = "local-psi"
//!
//! [integrand]
//! m = 8
//! a = [5]
//! phi = [{ exp = [0], coef = [1.0, 0.0] }]
//!
//! [sweep]
//! t0 = 1e-2
//! ratio = 0.1
//! count = 8
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::asymptotics::{default_p_grid, SweepParams};
use crate::bounds::BoundsPath;
use crate::charindex::MultiIndexPair;
use crate::integrator::{LocalIntegrand, QuadratureConfig};
use crate::poly::PolyMap;
use crate::pseudonorm::{Chart, CoverModel, SectionModel};
use crate::resolution::{Divisor, ResolutionModel, Stratum};
use crate::weight::WeightFn;

pub const SCENARIO_SCHEMA: &str = "plurinorm.scenario/v1";

/// 1-based position in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

fn at(location: &Option<Location>) -> String {
    location.map(|l| format!(" at {l}")).unwrap_or_default()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("parse error{}: {message}", at(.location))]
    Parse { location: Option<Location>, message: String },
    #[error("invalid scenario{}: {context}: {message}", at(.location))]
    Invalid { location: Option<Location>, context: String, message: String },
}

impl ScenarioError {
    pub fn location(&self) -> Option<Location> {
        match self {
            ScenarioError::Parse { location, .. } | ScenarioError::Invalid { location, .. } => *location,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    LocalPsi,
    GlobalCover,
    Resolution,
    Bounds,
    Semigroup,
    PropertySuite,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::LocalPsi,
        ScenarioKind::GlobalCover,
        ScenarioKind::Resolution,
        ScenarioKind::Bounds,
        ScenarioKind::Semigroup,
        ScenarioKind::PropertySuite,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::LocalPsi => "local-psi",
            ScenarioKind::GlobalCover => "global-cover",
            ScenarioKind::Resolution => "resolution",
            ScenarioKind::Bounds => "bounds",
            ScenarioKind::Semigroup => "semigroup",
            ScenarioKind::PropertySuite => "property-suite",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: Option<String>,
    pub body: ScenarioBody,
}

impl Scenario {
    pub fn kind(&self) -> ScenarioKind {
        match &self.body {
            ScenarioBody::LocalPsi(_) => ScenarioKind::LocalPsi,
            ScenarioBody::GlobalCover(_) => ScenarioKind::GlobalCover,
            ScenarioBody::Resolution(_) => ScenarioKind::Resolution,
            ScenarioBody::Bounds(_) => ScenarioKind::Bounds,
            ScenarioBody::Semigroup(_) => ScenarioKind::Semigroup,
            ScenarioBody::PropertySuite(_) => ScenarioKind::PropertySuite,
        }
    }
}

#[derive(Clone, Debug)]
pub enum ScenarioBody {
    LocalPsi(LocalPsiScenario),
    GlobalCover(GlobalCoverScenario),
    Resolution(ResolutionScenario),
    Bounds(BoundsScenario),
    Semigroup(SemigroupScenario),
    PropertySuite(SuiteScenario),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    pub p_grid: Vec<u32>,
    /// Also fit with the log power pinned to this value.
    pub fixed_log_power: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct LocalPsiScenario {
    pub integrand: LocalIntegrand,
    pub sweep: SweepParams,
    pub quadrature: QuadratureConfig,
    pub fit: FitOptions,
}

#[derive(Clone, Debug)]
pub struct GlobalCoverScenario {
    pub charts: Vec<(String, LocalIntegrand)>,
    /// The charts' weights and `B` as a pseudonorm cover.
    pub cover: Arc<CoverModel>,
    /// Named sections; empty when the scenario declares none.
    pub sections: Vec<(String, SectionModel)>,
    pub sweep: Option<SweepParams>,
    pub quadrature: QuadratureConfig,
    pub fit: FitOptions,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultAudit {
    pub point: String,
    pub mult: u32,
    pub n: u32,
}

#[derive(Clone, Debug)]
pub struct ResolutionScenario {
    pub model: ResolutionModel,
    pub audits: Vec<MultAudit>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsScenario {
    pub n: u64,
    pub path: BoundsPath,
    /// `(n, a)` arguments for the freeness degree.
    pub kollar: Vec<(u64, u64)>,
    /// `(ν, m)` arguments for the multiplicity test in dimension `n`.
    pub power_checks: Vec<(u64, u64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SemigroupScenario {
    pub limit: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PseudonormLawsSpec {
    pub n: usize,
    pub ms: Vec<u32>,
    pub charts: Vec<(String, WeightFn, Vec<u32>)>,
    pub scales: Vec<Complex64>,
    pub pairs: usize,
    pub max_degree: u32,
    pub max_terms: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteScenario {
    pub seed: u64,
    pub quadrature: QuadratureConfig,
    pub char_order_pairs: Option<usize>,
    pub pseudonorm_laws: Option<PseudonormLawsSpec>,
    pub semigroup_limit: Option<usize>,
    pub inequality_max: Option<u64>,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let header: Header = from_toml(text)?;
    if header.schema.get_ref() != SCENARIO_SCHEMA {
        return Err(invalid(
            text,
            header.schema.span(),
            "schema",
            format!("unsupported schema {:?}; expected {SCENARIO_SCHEMA:?}", header.schema.get_ref()),
        ));
    }
    let kind = ScenarioKind::ALL
        .into_iter()
        .find(|k| k.as_str() == header.kind.get_ref())
        .ok_or_else(|| {
            let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.as_str()).collect();
            invalid(
                text,
                header.kind.span(),
                "kind",
                format!("unknown kind {:?}; expected one of {names:?}", header.kind.get_ref()),
            )
        })?;
    let body = match kind {
        ScenarioKind::LocalPsi => ScenarioBody::LocalPsi(from_toml::<LocalPsiFile>(text)?.build(text)?),
        ScenarioKind::GlobalCover => ScenarioBody::GlobalCover(from_toml::<GlobalCoverFile>(text)?.build(text)?),
        ScenarioKind::Resolution => ScenarioBody::Resolution(from_toml::<ResolutionFile>(text)?.build(text)?),
        ScenarioKind::Bounds => ScenarioBody::Bounds(from_toml::<BoundsFile>(text)?.build(text)?),
        ScenarioKind::Semigroup => ScenarioBody::Semigroup(from_toml::<SemigroupFile>(text)?.build(text)?),
        ScenarioKind::PropertySuite => ScenarioBody::PropertySuite(from_toml::<SuiteFile>(text)?.build(text)?),
    };
    Ok(Scenario { name: header.name, body })
}

fn location(text: &str, offset: usize) -> Location {
    let offset = offset.min(text.len());
    let before = &text.as_bytes()[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let line_start = before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    let column = String::from_utf8_lossy(&before[line_start..]).chars().count() + 1;
    Location { line, column }
}

fn from_toml<T: DeserializeOwned>(text: &str) -> Result<T, ScenarioError> {
    toml::from_str(text).map_err(|e| ScenarioError::Parse {
        location: e.span().map(|s| location(text, s.start)),
        message: e.message().trim_end().to_string(),
    })
}

fn invalid(text: &str, span: Range<usize>, context: &str, message: impl fmt::Display) -> ScenarioError {
    ScenarioError::Invalid {
        location: Some(location(text, span.start)),
        context: context.to_string(),
        message: message.to_string(),
    }
}

fn invalid_here(context: &str, message: impl fmt::Display) -> ScenarioError {
    ScenarioError::Invalid { location: None, context: context.to_string(), message: message.to_string() }
}

#[derive(Deserialize)]
struct Header {
    schema: Spanned<String>,
    kind: Spanned<String>,
    name: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct QuadratureSpec {
    radial_nodes: Option<usize>,
    angular_nodes: Option<usize>,
    max_depth: Option<u32>,
    rel_tol: Option<f64>,
    abs_floor: Option<f64>,
}

impl QuadratureSpec {
    fn build(&self) -> Result<QuadratureConfig, ScenarioError> {
        let d = QuadratureConfig::default();
        let cfg = QuadratureConfig {
            radial_nodes: self.radial_nodes.unwrap_or(d.radial_nodes),
            angular_nodes: self.angular_nodes.unwrap_or(d.angular_nodes),
            max_depth: self.max_depth.unwrap_or(d.max_depth),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_floor: self.abs_floor.unwrap_or(d.abs_floor),
        };
        cfg.validate().map_err(|e| invalid_here("quadrature", e))?;
        Ok(cfg)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermSpec {
    exp: Vec<u32>,
    coef: [f64; 2],
}

fn build_poly(text: &str, context: &str, n: usize, terms: &[Spanned<TermSpec>]) -> Result<PolyMap, ScenarioError> {
    let mut out = Vec::with_capacity(terms.len());
    for (k, term) in terms.iter().enumerate() {
        let t = term.get_ref();
        let ctx = format!("{context}[{k}]");
        if t.exp.len() != n {
            return Err(invalid(
                text,
                term.span(),
                &ctx,
                format!("exponent vector {:?} has length {}, expected {n}", t.exp, t.exp.len()),
            ));
        }
        if !(t.coef[0].is_finite() && t.coef[1].is_finite()) {
            return Err(invalid(text, term.span(), &ctx, "coefficient is not finite"));
        }
        out.push((t.exp.clone(), Complex64::new(t.coef[0], t.coef[1])));
    }
    PolyMap::new(n, out).map_err(|e| invalid_here(context, e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadialTermSpec {
    exp: Vec<u32>,
    coef: f64,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum WeightSpec {
    Constant { value: f64 },
    RadialPolynomial { terms: Vec<RadialTermSpec> },
    SeparableBump { scale: f64, radii: Vec<f64> },
}

fn build_weight(text: &str, context: &str, n: usize, spec: Option<&Spanned<WeightSpec>>) -> Result<WeightFn, ScenarioError> {
    let Some(spec) = spec else {
        return Ok(WeightFn::Constant(1.0));
    };
    let w = match spec.get_ref() {
        WeightSpec::Constant { value } => WeightFn::constant(*value),
        WeightSpec::RadialPolynomial { terms } => {
            WeightFn::radial_polynomial(n, terms.iter().map(|t| (t.exp.clone(), t.coef)).collect())
        }
        WeightSpec::SeparableBump { scale, radii } => WeightFn::separable_bump(*scale, radii.clone()),
    };
    let w = w.map_err(|e| invalid(text, spec.span(), context, e))?;
    w.check_dim(n).map_err(|e| invalid(text, spec.span(), context, e))?;
    Ok(w)
}

fn build_pair(text: &str, context: &str, a: &Spanned<Vec<u32>>, b: Option<&Spanned<Vec<u32>>>) -> Result<MultiIndexPair, ScenarioError> {
    let n = a.get_ref().len();
    let b_vec = b.map_or_else(|| vec![0; n], |b| b.get_ref().clone());
    let span = b.map_or_else(|| a.span(), |b| b.span());
    MultiIndexPair::new(a.get_ref().clone(), b_vec).map_err(|e| invalid(text, span, context, e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FitSpec {
    p_grid: Option<Vec<u32>>,
    fixed_log_power: Option<u32>,
}

fn build_fit(spec: Option<&FitSpec>, n: usize) -> Result<FitOptions, ScenarioError> {
    let p_grid = spec.and_then(|f| f.p_grid.clone()).unwrap_or_else(|| default_p_grid(n));
    if p_grid.is_empty() {
        return Err(invalid_here("fit.p_grid", "must not be empty"));
    }
    Ok(FitOptions { p_grid, fixed_log_power: spec.and_then(|f| f.fixed_log_power) })
}

fn build_sweep(text: &str, sweep: &Spanned<SweepParams>) -> Result<SweepParams, ScenarioError> {
    sweep.get_ref().validate().map_err(|e| invalid(text, sweep.span(), "sweep", e))?;
    Ok(*sweep.get_ref())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegrandSpec {
    m: u32,
    a: Spanned<Vec<u32>>,
    b: Option<Spanned<Vec<u32>>>,
    phi: Vec<Spanned<TermSpec>>,
    weight: Option<Spanned<WeightSpec>>,
}

impl IntegrandSpec {
    fn build(&self, text: &str, context: &str) -> Result<LocalIntegrand, ScenarioError> {
        let pair = build_pair(text, context, &self.a, self.b.as_ref())?;
        let n = pair.dim();
        let phi = build_poly(text, &format!("{context}.phi"), n, &self.phi)?;
        let chi = build_weight(text, &format!("{context}.weight"), n, self.weight.as_ref())?;
        LocalIntegrand::new(pair, self.m, phi, chi).map_err(|e| invalid(text, self.a.span(), context, e))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalPsiFile {
    #[allow(dead_code)]
    schema: String,
    #[allow(dead_code)]
    kind: String,
    #[allow(dead_code)]
    name: Option<String>,
    quadrature: Option<QuadratureSpec>,
    integrand: IntegrandSpec,
    sweep: Spanned<SweepParams>,
    fit: Option<FitSpec>,
}

impl LocalPsiFile {
    fn build(self, text: &str) -> Result<LocalPsiScenario, ScenarioError> {
        let integrand = self.integrand.build(text, "integrand")?;
        Ok(LocalPsiScenario {
            sweep: build_sweep(text, &self.sweep)?,
            quadrature: self.quadrature.unwrap_or_default().build()?,
            fit: build_fit(self.fit.as_ref(), integrand.dim())?,
            integrand,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartSpec {
    id: Spanned<String>,
    a: Spanned<Vec<u32>>,
    b: Option<Spanned<Vec<u32>>>,
    #[serde(default)]
    phi: Vec<Spanned<TermSpec>>,
    weight: Option<Spanned<WeightSpec>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SectionSpec {
    id: Spanned<String>,
    /// Chart id to numerator; charts left out get the zero numerator.
    numerators: BTreeMap<String, Vec<Spanned<TermSpec>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GlobalCoverFile {
    #[allow(dead_code)]
    schema: String,
    #[allow(dead_code)]
    kind: String,
    #[allow(dead_code)]
    name: Option<String>,
    m: u32,
    quadrature: Option<QuadratureSpec>,
    charts: Vec<Spanned<ChartSpec>>,
    #[serde(default)]
    sections: Vec<Spanned<SectionSpec>>,
    sweep: Option<Spanned<SweepParams>>,
    fit: Option<FitSpec>,
}

impl GlobalCoverFile {
    fn build(self, text: &str) -> Result<GlobalCoverScenario, ScenarioError> {
        let first = self.charts.first().ok_or_else(|| invalid_here("charts", "cover has no charts"))?;
        let n = first.get_ref().a.get_ref().len();
        let mut charts = Vec::with_capacity(self.charts.len());
        let mut cover_charts = Vec::with_capacity(self.charts.len());
        let mut seen = BTreeSet::new();
        for (k, spanned) in self.charts.iter().enumerate() {
            let c = spanned.get_ref();
            let ctx = format!("charts[{k}]");
            if !seen.insert(c.id.get_ref().clone()) {
                return Err(invalid(text, c.id.span(), &ctx, format!("chart id {:?} declared twice", c.id.get_ref())));
            }
            let pair = build_pair(text, &ctx, &c.a, c.b.as_ref())?;
            if pair.dim() != n {
                return Err(invalid(text, c.a.span(), &ctx, format!("chart has dimension {}, expected {n}", pair.dim())));
            }
            let phi = build_poly(text, &format!("{ctx}.phi"), n, &c.phi)?;
            let chi = build_weight(text, &format!("{ctx}.weight"), n, c.weight.as_ref())?;
            cover_charts.push(Chart { id: c.id.get_ref().clone(), weight: chi.clone(), b: pair.b().to_vec() });
            let integrand =
                LocalIntegrand::new(pair, self.m, phi, chi).map_err(|e| invalid(text, spanned.span(), &ctx, e))?;
            charts.push((c.id.get_ref().clone(), integrand));
        }
        let cover = Arc::new(CoverModel::new(self.m, n, cover_charts).map_err(|e| invalid_here("charts", e))?);

        let mut sections = Vec::with_capacity(self.sections.len());
        let mut section_ids = BTreeSet::new();
        for (k, spanned) in self.sections.iter().enumerate() {
            let s = spanned.get_ref();
            let ctx = format!("sections[{k}]");
            if !section_ids.insert(s.id.get_ref().clone()) {
                return Err(invalid(text, s.id.span(), &ctx, format!("section id {:?} declared twice", s.id.get_ref())));
            }
            if let Some(unknown) = s.numerators.keys().find(|id| !seen.contains(*id)) {
                return Err(invalid(text, spanned.span(), &ctx, format!("numerator for unknown chart {unknown:?}")));
            }
            let numerators = charts
                .iter()
                .map(|(id, _)| match s.numerators.get(id) {
                    Some(terms) => build_poly(text, &format!("{ctx}.numerators.{id}"), n, terms),
                    None => Ok(PolyMap::zero(n)),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let section =
                SectionModel::new(Arc::clone(&cover), numerators).map_err(|e| invalid(text, spanned.span(), &ctx, e))?;
            sections.push((s.id.get_ref().clone(), section));
        }

        Ok(GlobalCoverScenario {
            charts,
            cover,
            sections,
            sweep: self.sweep.as_ref().map(|s| build_sweep(text, s)).transpose()?,
            quadrature: self.quadrature.unwrap_or_default().build()?,
            fit: build_fit(self.fit.as_ref(), n)?,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DivisorSpec {
    id: String,
    a: u32,
    b: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StratumSpec {
    divisors: Vec<String>,
    image: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AuditSpec {
    point: String,
    mult: u32,
    n: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResolutionFile {
    #[allow(dead_code)]
    schema: String,
    #[allow(dead_code)]
    kind: String,
    #[allow(dead_code)]
    name: Option<String>,
    points: Spanned<Vec<String>>,
    #[serde(default)]
    divisors: Vec<Spanned<DivisorSpec>>,
    #[serde(default)]
    strata: Vec<Spanned<StratumSpec>>,
    #[serde(default)]
    audits: Vec<Spanned<AuditSpec>>,
}

impl ResolutionFile {
    fn build(self, text: &str) -> Result<ResolutionScenario, ScenarioError> {
        use crate::resolution::ResolutionError as E;
        let divisors: Vec<Divisor> = self
            .divisors
            .iter()
            .map(|d| {
                let d = d.get_ref();
                Divisor { id: d.id.clone(), a: d.a, b: d.b }
            })
            .collect();
        let strata: Vec<Stratum> = self
            .strata
            .iter()
            .map(|s| {
                let s = s.get_ref();
                Stratum { divisors: s.divisors.iter().cloned().collect(), image: s.image.iter().cloned().collect() }
            })
            .collect();
        let model = ResolutionModel::new(divisors, strata, self.points.get_ref().clone()).map_err(|e| {
            let divisor_span = |id: &str| self.divisors.iter().find(|d| d.get_ref().id == id).map(|d| d.span());
            let span = match &e {
                E::DuplicateDivisor(id) | E::ZeroMultiplicity(id) | E::MissingImage(id) => divisor_span(id),
                E::EmptyStratum { index }
                | E::EmptyImage { index }
                | E::UnknownStratumDivisor { index, .. }
                | E::UnknownStratumPoint { index, .. }
                | E::MissingFace { index, .. }
                | E::FaceImageTooSmall { index, .. }
                | E::StratumTooLarge { index, .. } => self.strata.get(*index).map(|s| s.span()),
                E::DuplicateStratum { second, .. } => self.strata.get(*second).map(|s| s.span()),
                _ => None,
            };
            let span = span.unwrap_or_else(|| self.points.span());
            invalid(text, span, "resolution", e)
        })?;
        let audits = self
            .audits
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let spec = a.get_ref();
                let ctx = format!("audits[{k}]");
                if spec.mult == 0 || spec.n == 0 {
                    return Err(invalid(text, a.span(), &ctx, "mult and n must be positive"));
                }
                match model.local_lct(&spec.point) {
                    Ok(l) if l.is_finite() => {}
                    Ok(_) => return Err(invalid(text, a.span(), &ctx, format!("no divisor passes through {:?}", spec.point))),
                    Err(e) => return Err(invalid(text, a.span(), &ctx, e)),
                }
                Ok(MultAudit { point: spec.point.clone(), mult: spec.mult, n: spec.n })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ResolutionScenario { model, audits })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerCheckSpec {
    nu: u64,
    m: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsFile {
    #[allow(dead_code)]
    schema: String,
    #[allow(dead_code)]
    kind: String,
    #[allow(dead_code)]
    name: Option<String>,
    n: u64,
    path: Spanned<String>,
    #[serde(default)]
    kollar: Vec<[u64; 2]>,
    #[serde(default)]
    power_checks: Vec<PowerCheckSpec>,
}

impl BoundsFile {
    fn build(self, text: &str) -> Result<BoundsScenario, ScenarioError> {
        let path: BoundsPath = self.path.get_ref().parse().map_err(|e: String| invalid(text, self.path.span(), "path", e))?;
        if self.n == 0 {
            return Err(invalid_here("n", "dimension must be positive"));
        }
        if path == BoundsPath::Surface && self.n != 2 {
            return Err(invalid(text, self.path.span(), "path", "the surface path needs n = 2"));
        }
        Ok(BoundsScenario {
            n: self.n,
            path,
            kollar: self.kollar.iter().map(|[n, a]| (*n, *a)).collect(),
            power_checks: self.power_checks.iter().map(|c| (c.nu, c.m)).collect(),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SemigroupFile {
    #[allow(dead_code)]
    schema: String,
    #[allow(dead_code)]
    kind: String,
    #[allow(dead_code)]
    name: Option<String>,
    limit: Spanned<usize>,
}

impl SemigroupFile {
    fn build(self, text: &str) -> Result<SemigroupScenario, ScenarioError> {
        let limit = *self.limit.get_ref();
        if !(100..=10_000_000).contains(&limit) {
            return Err(invalid(text, self.limit.span(), "limit", format!("{limit} is outside [100, 10^7]")));
        }
        Ok(SemigroupScenario { limit })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CharOrderSpec {
    pairs: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LawChartSpec {
    id: String,
    b: Option<Vec<u32>>,
    weight: Option<Spanned<WeightSpec>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LawsSpec {
    n: usize,
    m: Vec<u32>,
    scales: Vec<[f64; 2]>,
    pairs: usize,
    max_degree: u32,
    max_terms: usize,
    charts: Vec<Spanned<LawChartSpec>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SemigroupCheckSpec {
    limit: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InequalitySpec {
    max: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteFile {
    #[allow(dead_code)]
    schema: String,
    #[allow(dead_code)]
    kind: String,
    #[allow(dead_code)]
    name: Option<String>,
    seed: u64,
    quadrature: Option<QuadratureSpec>,
    char_order: Option<CharOrderSpec>,
    pseudonorm_laws: Option<Spanned<LawsSpec>>,
    semigroup: Option<SemigroupCheckSpec>,
    inequality: Option<InequalitySpec>,
}

impl SuiteFile {
    fn build(self, text: &str) -> Result<SuiteScenario, ScenarioError> {
        if self.char_order.is_none() && self.pseudonorm_laws.is_none() && self.semigroup.is_none() && self.inequality.is_none() {
            return Err(invalid_here("suite", "no checks selected"));
        }
        let pseudonorm_laws = match &self.pseudonorm_laws {
            None => None,
            Some(spanned) => {
                let l = spanned.get_ref();
                let fail = |msg: String| invalid(text, spanned.span(), "pseudonorm_laws", msg);
                if l.n == 0 || l.charts.is_empty() || l.m.is_empty() {
                    return Err(fail("needs n > 0, at least one chart and at least one m".into()));
                }
                if let Some(m) = l.m.iter().find(|&&m| m < 3) {
                    return Err(fail(format!("m = {m} is below 3")));
                }
                if l.max_terms == 0 {
                    return Err(fail("max_terms must be positive".into()));
                }
                let mut charts = Vec::with_capacity(l.charts.len());
                for (k, c) in l.charts.iter().enumerate() {
                    let spec = c.get_ref();
                    let ctx = format!("pseudonorm_laws.charts[{k}]");
                    let b = spec.b.clone().unwrap_or_else(|| vec![0; l.n]);
                    if b.len() != l.n {
                        return Err(invalid(text, c.span(), &ctx, format!("b has length {}, expected {}", b.len(), l.n)));
                    }
                    let w = build_weight(text, &format!("{ctx}.weight"), l.n, spec.weight.as_ref())?;
                    charts.push((spec.id.clone(), w, b));
                }
                Some(PseudonormLawsSpec {
                    n: l.n,
                    ms: l.m.clone(),
                    charts,
                    scales: l.scales.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
                    pairs: l.pairs,
                    max_degree: l.max_degree,
                    max_terms: l.max_terms,
                })
            }
        };
        if let Some(s) = &self.semigroup {
            if !(100..=10_000_000).contains(&s.limit) {
                return Err(invalid_here("semigroup.limit", format!("{} is outside [100, 10^7]", s.limit)));
            }
        }
        if let Some(i) = &self.inequality {
            if !(3..=100_000).contains(&i.max) {
                return Err(invalid_here("inequality.max", format!("{} is outside [3, 10^5]", i.max)));
            }
        }
        Ok(SuiteScenario {
            seed: self.seed,
            quadrature: self.quadrature.unwrap_or_default().build()?,
            char_order_pairs: self.char_order.map(|c| c.pairs),
            pseudonorm_laws,
            semigroup_limit: self.semigroup.map(|s| s.limit),
            inequality_max: self.inequality.map(|i| i.max),
        })
    }
}
