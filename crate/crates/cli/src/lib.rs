//! Scenario-driven front end for `plurinorm`.
//!
//! [`run`] parses a scenario, dispatches it to the library and renders the
//! result twice: a JSON summary and a CSV table. Both renderings carry a
//! versioned schema id and print every float with 17 significant digits, so
//! identical inputs give byte-identical output.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use thiserror::Error;

use plurinorm::asymptotics::{
    case1_ratios, classify_case, coefficient_vanishes_canonical, fit_expansion, fit_fixed_log_power,
    global_expansion, sample_psi, AsymptoticFitResult, AsymptoticsError, CaseClassification, ExpansionCase,
    PsiSamples, SweepParams,
};
use plurinorm::bounds::{
    bounds_report, kollar_free_degree, power_multiplicity_check, surface_semigroup, BoundsError,
    PowerMultiplicityCheck, GENERATORS_RULE,
};
use plurinorm::charindex::{canonical_chart_order, local_char_index, CharIndex};
use plurinorm::integrator::{psi_at_zero, IntegratorError, LocalIntegrand, QuadratureConfig};
use plurinorm::pseudonorm::{distance, pseudonorm, PseudonormError};
use plurinorm::quadrature::Estimate;
use plurinorm::rational::rational_to_f64;
use plurinorm::report::{fmt_f64, write_json, Num};
use plurinorm::resolution::{ResolutionError, ResolutionModel};
use plurinorm::scenario::{
    parse_scenario, GlobalCoverScenario, LocalPsiScenario, MultAudit, ResolutionScenario, Scenario, ScenarioBody,
    ScenarioKind,
};

pub mod suite;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    PsiSweep,
    Fit,
    Lct,
    Indicatrix,
    Pseudonorm,
    Bounds,
    Semigroup,
    Suite,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::PsiSweep,
        Command::Fit,
        Command::Lct,
        Command::Indicatrix,
        Command::Pseudonorm,
        Command::Bounds,
        Command::Semigroup,
        Command::Suite,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::PsiSweep => "psi-sweep",
            Command::Fit => "fit",
            Command::Lct => "lct",
            Command::Indicatrix => "indicatrix",
            Command::Pseudonorm => "pseudonorm",
            Command::Bounds => "bounds",
            Command::Semigroup => "semigroup",
            Command::Suite => "suite",
        }
    }

    /// Sweeps default to CSV, everything else to JSON.
    pub fn default_format(&self) -> Format {
        match self {
            Command::PsiSweep => Format::Csv,
            _ => Format::Json,
        }
    }

    pub fn schema(&self) -> String {
        format!("plurinorm.{}/v1", self.as_str())
    }

    fn accepts(&self) -> &'static [ScenarioKind] {
        use ScenarioKind::*;
        match self {
            Command::PsiSweep | Command::Fit => &[LocalPsi, GlobalCover],
            Command::Lct => &[Resolution, LocalPsi, GlobalCover],
            Command::Indicatrix => &[Resolution],
            Command::Pseudonorm => &[GlobalCover],
            Command::Bounds => &[Bounds],
            Command::Semigroup => &[Semigroup],
            Command::Suite => &[PropertySuite],
        }
    }
}

/// Command-line values that replace scenario fields.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub rel_tol: Option<f64>,
    pub max_depth: Option<u32>,
}

impl Overrides {
    fn apply(&self, cfg: &mut QuadratureConfig) -> Result<(), CliError> {
        if let Some(r) = self.rel_tol {
            cfg.rel_tol = r;
        }
        if let Some(d) = self.max_depth {
            cfg.max_depth = d;
        }
        cfg.validate().map_err(|e| CliError::Validation(format!("override: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some quadrature hit its depth or panel budget.
    BudgetExhausted,
    /// A checked law or audit failed.
    InvariantViolated,
}

impl Status {
    pub fn exit_code(&self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::BudgetExhausted => 3,
            Status::InvariantViolated => 4,
        }
    }

    fn worst(self, other: Status) -> Status {
        if self.exit_code() >= other.exit_code() {
            self
        } else {
            other
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<AsymptoticsError> for CliError {
    fn from(e: AsymptoticsError) -> Self {
        match e {
            AsymptoticsError::InsufficientSignal { .. } | AsymptoticsError::MixedSign => CliError::Numeric(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Validation(e.to_string())
            }
        }
    )*};
}
validation_from!(IntegratorError, PseudonormError, BoundsError, ResolutionError);

/// A finished run: both renderings and the status that decides the exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub json: String,
    pub csv: String,
    pub status: Status,
}

impl Report {
    pub fn render(&self, format: Format) -> &str {
        match format {
            Format::Csv => &self.csv,
            Format::Json => &self.json,
        }
    }
}

pub fn run(command: Command, scenario_text: &str, overrides: &Overrides) -> Result<Report, CliError> {
    let scenario = parse_scenario(scenario_text).map_err(|e| CliError::Validation(e.to_string()))?;
    let kind = scenario.kind();
    if !command.accepts().contains(&kind) {
        let accepted: Vec<&str> = command.accepts().iter().map(|k| k.as_str()).collect();
        return Err(CliError::Validation(format!(
            "`{}` does not take a {kind} scenario (accepted kinds: {})",
            command.as_str(),
            accepted.join(", ")
        )));
    }
    let name = scenario.name.clone();
    let header = Header { schema: command.schema(), scenario: name, kind: kind.as_str() };
    let out = match (command, scenario) {
        (Command::PsiSweep, Scenario { body: ScenarioBody::LocalPsi(s), .. }) => local_sweep(header, s, overrides)?,
        (Command::PsiSweep, Scenario { body: ScenarioBody::GlobalCover(s), .. }) => cover_sweep(header, s, overrides)?,
        (Command::Fit, Scenario { body: ScenarioBody::LocalPsi(s), .. }) => local_fit(header, s, overrides)?,
        (Command::Fit, Scenario { body: ScenarioBody::GlobalCover(s), .. }) => cover_fit(header, s, overrides)?,
        (Command::Lct, Scenario { body: ScenarioBody::Resolution(s), .. }) => resolution_lct(header, &s)?,
        (Command::Lct, Scenario { body: ScenarioBody::LocalPsi(s), .. }) => {
            charts_lct(header, &[("local".to_string(), s.integrand)])?
        }
        (Command::Lct, Scenario { body: ScenarioBody::GlobalCover(s), .. }) => charts_lct(header, &s.charts)?,
        (Command::Indicatrix, Scenario { body: ScenarioBody::Resolution(s), .. }) => indicatrix(header, &s)?,
        (Command::Pseudonorm, Scenario { body: ScenarioBody::GlobalCover(s), .. }) => {
            pseudonorms(header, s, overrides)?
        }
        (Command::Bounds, Scenario { body: ScenarioBody::Bounds(s), .. }) => bounds(header, &s)?,
        (Command::Semigroup, Scenario { body: ScenarioBody::Semigroup(s), .. }) => semigroup(header, s.limit)?,
        (Command::Suite, Scenario { body: ScenarioBody::PropertySuite(mut s), .. }) => {
            overrides.apply(&mut s.quadrature)?;
            suite::run_suite(header, &s)?
        }
        _ => unreachable!("kind checked above"),
    };
    Ok(out)
}

#[derive(Serialize)]
struct Header {
    schema: String,
    scenario: Option<String>,
    kind: &'static str,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    write_json(&mut buf, value).expect("writing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// CSV text with a leading `# schema` comment line.
fn csv_text(schema: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    let body = String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV is UTF-8");
    format!("# {schema}\n{body}")
}

fn samples_csv(schema: &str, samples: &PsiSamples) -> String {
    let mut buf = Vec::new();
    samples.write_csv(&mut buf).expect("writing to memory");
    format!("# {schema}\n{}", String::from_utf8(buf).expect("CSV is UTF-8"))
}

#[derive(Serialize)]
struct EstimateOut {
    value: Num,
    err: Num,
    exhausted: bool,
}

impl From<&Estimate<f64>> for EstimateOut {
    fn from(e: &Estimate<f64>) -> Self {
        Self { value: Num(e.value), err: Num(e.err), exhausted: e.exhausted }
    }
}

#[derive(Serialize)]
struct IndexOut {
    l: String,
    mu: u32,
}

impl From<CharIndex> for IndexOut {
    fn from(c: CharIndex) -> Self {
        Self { l: c.l.to_string(), mu: c.mu }
    }
}

#[derive(Serialize)]
struct SweepOut {
    t0: Num,
    ratio: Num,
    count: usize,
    theta: Num,
}

impl From<&SweepParams> for SweepOut {
    fn from(s: &SweepParams) -> Self {
        Self { t0: Num(s.t0), ratio: Num(s.ratio), count: s.count, theta: Num(s.theta) }
    }
}

#[derive(Serialize)]
struct SampleOut {
    t: Num,
    delta: Num,
    err_est: Num,
    exhausted: bool,
}

fn samples_out(s: &PsiSamples) -> Vec<SampleOut> {
    (0..s.len())
        .map(|k| SampleOut {
            t: Num(s.t_values()[k]),
            delta: Num(s.delta_values()[k]),
            err_est: Num(s.err_ests()[k]),
            exhausted: s.exhausted()[k],
        })
        .collect()
}

#[derive(Serialize)]
struct FitOut {
    c_hat: Num,
    alpha_hat: Num,
    p_hat: u32,
    residual_rms: Num,
    case: Option<&'static str>,
    window: [usize; 2],
}

impl From<&AsymptoticFitResult> for FitOut {
    fn from(f: &AsymptoticFitResult) -> Self {
        Self {
            c_hat: Num(f.c_hat),
            alpha_hat: Num(f.alpha_hat),
            p_hat: f.p_hat,
            residual_rms: Num(f.residual_rms),
            case: f.case.map(|c| c.as_str()),
            window: [f.window.start, f.window.end],
        }
    }
}

#[derive(Serialize)]
struct ClassificationOut {
    case: &'static str,
    l: String,
    mu: u32,
    exponent: String,
    exponent_f64: Num,
}

impl From<&CaseClassification> for ClassificationOut {
    fn from(c: &CaseClassification) -> Self {
        Self {
            case: c.case.as_str(),
            l: c.l.to_string(),
            mu: c.mu,
            exponent: c.exponent.to_string(),
            exponent_f64: Num(rational_to_f64(&c.exponent)),
        }
    }
}

fn sweep_cfg(cfg: &QuadratureConfig, overrides: &Overrides) -> Result<QuadratureConfig, CliError> {
    let mut cfg = *cfg;
    overrides.apply(&mut cfg)?;
    Ok(cfg)
}

fn budget(exhausted: bool) -> Status {
    if exhausted {
        Status::BudgetExhausted
    } else {
        Status::Ok
    }
}

#[derive(Serialize)]
struct LocalSweepOut {
    #[serde(flatten)]
    header: Header,
    n: usize,
    m: u32,
    psi0: EstimateOut,
    sweep: SweepOut,
    samples: Vec<SampleOut>,
}

fn local_sweep(header: Header, s: LocalPsiScenario, overrides: &Overrides) -> Result<Report, CliError> {
    let cfg = sweep_cfg(&s.quadrature, overrides)?;
    let psi0 = psi_at_zero(&s.integrand, &cfg)?;
    let samples = sample_psi(&s.integrand, &s.sweep, &cfg)?;
    let csv = samples_csv(&header.schema, &samples);
    let status = budget(psi0.exhausted || samples.any_exhausted());
    let out = LocalSweepOut {
        header,
        n: s.integrand.dim(),
        m: s.integrand.m(),
        psi0: (&psi0).into(),
        sweep: (&s.sweep).into(),
        samples: samples_out(&samples),
    };
    Ok(Report { json: to_json(&out), csv, status })
}

#[derive(Serialize)]
struct ChartSweepOut {
    id: String,
    index: IndexOut,
    psi0: EstimateOut,
    samples: Vec<SampleOut>,
}

#[derive(Serialize)]
struct CoverSweepOut {
    #[serde(flatten)]
    header: Header,
    n: usize,
    m: u32,
    sweep: SweepOut,
    charts: Vec<ChartSweepOut>,
    samples: Vec<SampleOut>,
}

fn require_sweep(s: &GlobalCoverScenario) -> Result<SweepParams, CliError> {
    s.sweep.ok_or_else(|| CliError::Validation("scenario declares no [sweep] table".into()))
}

fn cover_sweep(header: Header, s: GlobalCoverScenario, overrides: &Overrides) -> Result<Report, CliError> {
    let cfg = sweep_cfg(&s.quadrature, overrides)?;
    let sweep = require_sweep(&s)?;
    let mut charts = Vec::with_capacity(s.charts.len());
    let mut total: Option<PsiSamples> = None;
    let mut exhausted = false;
    for (id, integrand) in &s.charts {
        let psi0 = psi_at_zero(integrand, &cfg)?;
        let samples = sample_psi(integrand, &sweep, &cfg)?;
        exhausted |= psi0.exhausted || samples.any_exhausted();
        charts.push(ChartSweepOut {
            id: id.clone(),
            index: local_char_index(integrand.pair()).into(),
            psi0: (&psi0).into(),
            samples: samples_out(&samples),
        });
        total = Some(match total {
            None => samples,
            Some(acc) => acc.sum(&samples)?,
        });
    }
    let total = total.expect("cover has charts");
    let csv = samples_csv(&header.schema, &total);
    let out = CoverSweepOut {
        header,
        n: s.cover.dim(),
        m: s.cover.m(),
        sweep: (&sweep).into(),
        charts,
        samples: samples_out(&total),
    };
    Ok(Report { json: to_json(&out), csv, status: budget(exhausted) })
}

/// Relative tolerance on the fitted exponent for the case-2 law.
const EXPONENT_LAW_TOL: f64 = 0.02;

#[derive(Serialize)]
struct ExponentLawOut {
    expected_alpha: Num,
    expected_p: u32,
    alpha_rel_err: Num,
    holds: bool,
    /// The law is only enforced when the leading coefficient is nonzero.
    enforced: bool,
}

fn exponent_law(fit: &AsymptoticFitResult, class: &CaseClassification, enforced: bool) -> ExponentLawOut {
    let expected = rational_to_f64(&class.exponent);
    let rel = (fit.alpha_hat - expected).abs() / expected;
    ExponentLawOut {
        expected_alpha: Num(expected),
        expected_p: class.mu - 1,
        alpha_rel_err: Num(rel),
        holds: rel <= EXPONENT_LAW_TOL && fit.p_hat == class.mu - 1,
        enforced,
    }
}

#[derive(Serialize)]
struct LocalFitOut {
    #[serde(flatten)]
    header: Header,
    index: IndexOut,
    classification: ClassificationOut,
    coefficient_vanishes: bool,
    fit: Option<FitOut>,
    fit_error: Option<String>,
    fixed_log_power_fit: Option<FitOut>,
    exponent_law: Option<ExponentLawOut>,
    case1_ratios: Option<Vec<Num>>,
    samples_exhausted: bool,
}

fn fit_rows(fits: &[(&str, &AsymptoticFitResult)]) -> Vec<Vec<String>> {
    fits.iter()
        .map(|(label, f)| {
            vec![
                label.to_string(),
                fmt_f64(f.c_hat),
                fmt_f64(f.alpha_hat),
                f.p_hat.to_string(),
                fmt_f64(f.residual_rms),
                f.case.map_or("", |c| c.as_str()).to_string(),
            ]
        })
        .collect()
}

const FIT_HEADER: [&str; 6] = ["fit", "c_hat", "alpha_hat", "p_hat", "residual_rms", "case"];

fn local_fit(header: Header, s: LocalPsiScenario, overrides: &Overrides) -> Result<Report, CliError> {
    let cfg = sweep_cfg(&s.quadrature, overrides)?;
    let index = local_char_index(s.integrand.pair());
    let class = classify_case(s.integrand.pair(), s.integrand.m())?;
    let vanishes = coefficient_vanishes_canonical(&s.integrand)?;
    let samples = sample_psi(&s.integrand, &s.sweep, &cfg)?;
    let case1 = class.case == ExpansionCase::Case1;

    // case 1 deltas are O(t) and may change sign, so a failed fit is reported, not raised
    let (fit, fit_error) = match fit_expansion(&samples, &s.fit.p_grid) {
        Ok(mut f) => {
            f.case = Some(class.case);
            (Some(f), None)
        }
        Err(e) if case1 => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let fixed = match s.fit.fixed_log_power {
        Some(p) => fit_fixed_log_power(&samples, p).ok(),
        None => None,
    };
    let law = match (&fit, case1) {
        (Some(f), false) => Some(exponent_law(f, &class, !vanishes)),
        _ => None,
    };
    let ratios = case1.then(|| case1_ratios(&samples, class.mu));

    let mut status = budget(samples.any_exhausted());
    if law.as_ref().is_some_and(|l| l.enforced && !l.holds) || ratios.as_ref().is_some_and(|r| r.iter().any(|x| !x.is_finite())) {
        status = status.worst(Status::InvariantViolated);
    }
    let mut labelled = Vec::new();
    if let Some(f) = &fit {
        labelled.push(("free", f));
    }
    if let Some(f) = &fixed {
        labelled.push(("fixed_log_power", f));
    }
    let csv = csv_text(&header.schema, &FIT_HEADER, fit_rows(&labelled));
    let out = LocalFitOut {
        header,
        index: index.into(),
        classification: (&class).into(),
        coefficient_vanishes: vanishes,
        fit: fit.as_ref().map(Into::into),
        fit_error,
        fixed_log_power_fit: fixed.as_ref().map(Into::into),
        exponent_law: law,
        case1_ratios: ratios.map(|r| r.into_iter().map(Num).collect()),
        samples_exhausted: samples.any_exhausted(),
    };
    Ok(Report { json: to_json(&out), csv, status })
}

#[derive(Serialize)]
struct ChartFitOut {
    id: String,
    index: IndexOut,
    maximal: bool,
    fit: Option<FitOut>,
}

#[derive(Serialize)]
struct SupLawOut {
    expected_alpha: Num,
    expected_p: u32,
    alpha_rel_err: Num,
    holds: bool,
}

#[derive(Serialize)]
struct CoverFitOut {
    #[serde(flatten)]
    header: Header,
    index: IndexOut,
    classification: ClassificationOut,
    fit: FitOut,
    maximal_c_sum: Option<Num>,
    charts: Vec<ChartFitOut>,
    sup_law: Option<SupLawOut>,
    samples_exhausted: bool,
}

fn cover_fit(header: Header, s: GlobalCoverScenario, overrides: &Overrides) -> Result<Report, CliError> {
    let cfg = sweep_cfg(&s.quadrature, overrides)?;
    let sweep = require_sweep(&s)?;
    let g = global_expansion(&s.charts, &sweep, &cfg, &s.fit.p_grid)?;
    let sup_law = (g.classification.case == ExpansionCase::Case2).then(|| {
        let law = exponent_law(&g.fit, &g.classification, true);
        SupLawOut {
            expected_alpha: law.expected_alpha,
            expected_p: law.expected_p,
            alpha_rel_err: law.alpha_rel_err,
            holds: law.holds,
        }
    });
    let mut status = budget(g.samples.any_exhausted());
    if sup_law.as_ref().is_some_and(|l| !l.holds) {
        status = status.worst(Status::InvariantViolated);
    }
    let mut labelled = vec![("global".to_string(), &g.fit)];
    for c in &g.charts {
        if let Some(f) = &c.fit {
            labelled.push((format!("chart:{}", c.id), f));
        }
    }
    let refs: Vec<(&str, &AsymptoticFitResult)> = labelled.iter().map(|(l, f)| (l.as_str(), *f)).collect();
    let csv = csv_text(&header.schema, &FIT_HEADER, fit_rows(&refs));
    let out = CoverFitOut {
        header,
        index: g.index.into(),
        classification: (&g.classification).into(),
        fit: (&g.fit).into(),
        maximal_c_sum: g.maximal_c_sum().map(Num),
        charts: g
            .charts
            .iter()
            .map(|c| ChartFitOut { id: c.id.clone(), index: c.index.into(), maximal: c.maximal, fit: c.fit.as_ref().map(Into::into) })
            .collect(),
        sup_law,
        samples_exhausted: g.samples.any_exhausted(),
    };
    Ok(Report { json: to_json(&out), csv, status })
}

#[derive(Serialize)]
struct PointOut {
    point: String,
    lct: String,
    mu: u32,
}

#[derive(Serialize)]
struct AuditOut {
    point: String,
    mult: u32,
    n: u32,
    lct: String,
    bound: String,
    holds: bool,
}

fn audits(model: &ResolutionModel, audits: &[MultAudit]) -> Result<(Vec<AuditOut>, bool), CliError> {
    let mut all = true;
    let mut out = Vec::with_capacity(audits.len());
    for a in audits {
        let holds = model.mult_bound_check(&a.point, a.mult, a.n)?;
        all &= holds;
        out.push(AuditOut {
            point: a.point.clone(),
            mult: a.mult,
            n: a.n,
            lct: model.local_lct(&a.point)?.to_string(),
            bound: num_rational::Ratio::new(a.n as i128, a.mult as i128).to_string(),
            holds,
        });
    }
    Ok((out, all))
}

fn point_rows(model: &ResolutionModel) -> Vec<PointOut> {
    model
        .point_reports()
        .into_iter()
        .map(|r| PointOut { point: r.point, lct: r.lct.to_string(), mu: r.mu })
        .collect()
}

#[derive(Serialize)]
struct ResolutionLctOut {
    #[serde(flatten)]
    header: Header,
    global_lct: String,
    points: Vec<PointOut>,
    audits: Vec<AuditOut>,
}

fn resolution_lct(header: Header, s: &ResolutionScenario) -> Result<Report, CliError> {
    let (audit_rows, audits_ok) = audits(&s.model, &s.audits)?;
    let points = point_rows(&s.model);
    let csv = csv_text(
        &header.schema,
        &["point", "lct", "mu"],
        points.iter().map(|p| vec![p.point.clone(), p.lct.clone(), p.mu.to_string()]),
    );
    let out = ResolutionLctOut { header, global_lct: s.model.global_lct().to_string(), points, audits: audit_rows };
    let status = if audits_ok { Status::Ok } else { Status::InvariantViolated };
    Ok(Report { json: to_json(&out), csv, status })
}

#[derive(Serialize)]
struct ChartIndexOut {
    id: String,
    a: Vec<u32>,
    b: Vec<u32>,
    thresholds: Vec<String>,
    index: IndexOut,
    canonical_order: Vec<usize>,
    classification: Option<ClassificationOut>,
    maximal: bool,
}

#[derive(Serialize)]
struct ChartsLctOut {
    #[serde(flatten)]
    header: Header,
    m: u32,
    index: IndexOut,
    charts: Vec<ChartIndexOut>,
}

fn charts_lct(header: Header, charts: &[(String, LocalIntegrand)]) -> Result<Report, CliError> {
    let indices: Vec<CharIndex> = charts.iter().map(|(_, c)| local_char_index(c.pair())).collect();
    let best = *indices.iter().max().expect("at least one chart");
    let m = charts[0].1.m();
    let rows: Vec<ChartIndexOut> = charts
        .iter()
        .zip(&indices)
        .map(|((id, c), idx)| ChartIndexOut {
            id: id.clone(),
            a: c.pair().a().to_vec(),
            b: c.pair().b().to_vec(),
            thresholds: c.pair().thresholds().iter().map(|t| t.to_string()).collect(),
            index: (*idx).into(),
            canonical_order: canonical_chart_order(c.pair()),
            classification: classify_case(c.pair(), m).ok().as_ref().map(Into::into),
            maximal: *idx == best && !best.is_empty(),
        })
        .collect();
    let csv = csv_text(
        &header.schema,
        &["chart", "l", "mu", "maximal"],
        rows.iter().map(|r| vec![r.id.clone(), r.index.l.clone(), r.index.mu.to_string(), r.maximal.to_string()]),
    );
    let out = ChartsLctOut { header, m, index: best.into(), charts: rows };
    Ok(Report { json: to_json(&out), csv, status: Status::Ok })
}

#[derive(Serialize)]
struct IndicatrixOut {
    #[serde(flatten)]
    header: Header,
    index: IndexOut,
    points: Vec<String>,
    strata_form_agrees: bool,
    per_point: Vec<PointOut>,
    audits: Vec<AuditOut>,
}

fn indicatrix(header: Header, s: &ResolutionScenario) -> Result<Report, CliError> {
    let (index, points) = s.model.characteristic_indicatrix()?;
    let from_strata = s.model.indicatrix_from_strata()?;
    let agrees = from_strata == (index, points.clone());
    let (audit_rows, audits_ok) = audits(&s.model, &s.audits)?;
    let per_point = point_rows(&s.model);
    let csv = csv_text(
        &header.schema,
        &["point", "lct", "mu", "in_indicatrix"],
        per_point.iter().map(|p| {
            vec![p.point.clone(), p.lct.clone(), p.mu.to_string(), points.contains(&p.point).to_string()]
        }),
    );
    let out = IndicatrixOut {
        header,
        index: index.into(),
        points: points.into_iter().collect(),
        strata_form_agrees: agrees,
        per_point,
        audits: audit_rows,
    };
    let status = if agrees && audits_ok { Status::Ok } else { Status::InvariantViolated };
    Ok(Report { json: to_json(&out), csv, status })
}

#[derive(Serialize)]
struct SectionOut {
    id: String,
    is_zero: bool,
    pseudonorm: EstimateOut,
}

#[derive(Serialize)]
struct DistanceOut {
    from: String,
    to: String,
    distance: EstimateOut,
}

#[derive(Serialize)]
struct PseudonormOut {
    #[serde(flatten)]
    header: Header,
    m: u32,
    n: usize,
    weights_vanishing_at_origin: Vec<String>,
    sections: Vec<SectionOut>,
    distances: Vec<DistanceOut>,
}

fn pseudonorms(header: Header, s: GlobalCoverScenario, overrides: &Overrides) -> Result<Report, CliError> {
    if s.sections.is_empty() {
        return Err(CliError::Validation("scenario declares no [[sections]]".into()));
    }
    let cfg = sweep_cfg(&s.quadrature, overrides)?;
    let mut exhausted = false;
    let mut sections = Vec::with_capacity(s.sections.len());
    for (id, sec) in &s.sections {
        let v = pseudonorm(sec, &cfg)?;
        exhausted |= v.exhausted;
        sections.push(SectionOut { id: id.clone(), is_zero: sec.is_zero(), pseudonorm: (&v).into() });
    }
    let mut distances = Vec::new();
    for (i, (a, sa)) in s.sections.iter().enumerate() {
        for (b, sb) in &s.sections[i + 1..] {
            let d = distance(sa, sb, &cfg)?;
            exhausted |= d.exhausted;
            distances.push(DistanceOut { from: a.clone(), to: b.clone(), distance: (&d).into() });
        }
    }
    let mut csv_rows = Vec::new();
    for sec in &sections {
        csv_rows.push(vec![
            sec.id.clone(),
            String::new(),
            fmt_f64(sec.pseudonorm.value.0),
            fmt_f64(sec.pseudonorm.err.0),
            sec.pseudonorm.exhausted.to_string(),
        ]);
    }
    for d in &distances {
        csv_rows.push(vec![
            d.from.clone(),
            d.to.clone(),
            fmt_f64(d.distance.value.0),
            fmt_f64(d.distance.err.0),
            d.distance.exhausted.to_string(),
        ]);
    }
    let csv = csv_text(&header.schema, &["section", "minus", "value", "err", "exhausted"], csv_rows);
    let out = PseudonormOut {
        header,
        m: s.cover.m(),
        n: s.cover.dim(),
        weights_vanishing_at_origin: s.cover.weights_vanishing_at_origin().into_iter().map(String::from).collect(),
        sections,
        distances,
    };
    Ok(Report { json: to_json(&out), csv, status: budget(exhausted) })
}

#[derive(Serialize)]
struct PowerCheckOut {
    nu: u64,
    m: u64,
    n: u64,
    rhs: String,
    holds: bool,
    non_strict_reading: bool,
    strict_reading: bool,
    boundary: bool,
}

impl From<&PowerMultiplicityCheck> for PowerCheckOut {
    fn from(c: &PowerMultiplicityCheck) -> Self {
        Self {
            nu: c.nu,
            m: c.m,
            n: c.n,
            rhs: c.rhs.to_string(),
            holds: c.holds,
            non_strict_reading: c.non_strict_reading,
            strict_reading: c.strict_reading,
            boundary: c.boundary,
        }
    }
}

#[derive(Serialize)]
struct KollarOut {
    n: u64,
    a: u64,
    degree: u128,
}

#[derive(Serialize)]
struct BoundsOut {
    #[serde(flatten)]
    header: Header,
    n: u64,
    path: &'static str,
    d: u128,
    m0: u64,
    nu_min: u64,
    nu_min_strict: u64,
    r0: Option<u64>,
    r0_note: Option<String>,
    boundary_check: PowerCheckOut,
    kollar: Vec<KollarOut>,
    power_checks: Vec<PowerCheckOut>,
}

fn bounds(header: Header, s: &plurinorm::scenario::BoundsScenario) -> Result<Report, CliError> {
    let r = bounds_report(s.n, s.path)?;
    let boundary = r.boundary_check()?;
    let kollar = s
        .kollar
        .iter()
        .map(|&(n, a)| Ok(KollarOut { n, a, degree: kollar_free_degree(n, a)? }))
        .collect::<Result<Vec<_>, BoundsError>>()?;
    let checks = s
        .power_checks
        .iter()
        .map(|&(nu, m)| power_multiplicity_check(nu, m, s.n).map(|c| PowerCheckOut::from(&c)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = vec![
        vec!["n".into(), r.n.to_string()],
        vec!["path".into(), r.path.as_str().into()],
        vec!["d".into(), r.d.to_string()],
        vec!["m0".into(), r.m0.to_string()],
        vec!["nu_min".into(), r.nu_min.to_string()],
        vec!["nu_min_strict".into(), r.nu_min_strict.to_string()],
        vec!["r0".into(), r.r0.map_or_else(|| "unresolved".to_string(), |x| x.to_string())],
    ];
    for k in &kollar {
        rows.push(vec![format!("kollar({},{})", k.n, k.a), k.degree.to_string()]);
    }
    for c in &checks {
        rows.push(vec![format!("power_check(nu={},m={})", c.nu, c.m), c.holds.to_string()]);
    }
    let csv = csv_text(&header.schema, &["key", "value"], rows);
    let out = BoundsOut {
        header,
        n: r.n,
        path: r.path.as_str(),
        d: r.d,
        m0: r.m0,
        nu_min: r.nu_min,
        nu_min_strict: r.nu_min_strict,
        r0: r.r0,
        r0_note: r.r0_note.clone(),
        boundary_check: (&boundary).into(),
        kollar,
        power_checks: checks,
    };
    Ok(Report { json: to_json(&out), csv, status: Status::Ok })
}

/// The conductor claimed for the surface semigroup.
const SURFACE_CONDUCTOR: usize = 75;

#[derive(Serialize)]
struct SemigroupOut {
    #[serde(flatten)]
    header: Header,
    limit: usize,
    generators_rule: &'static str,
    minimal_generators: Vec<usize>,
    gaps: Vec<usize>,
    conductor: usize,
    closure_holds: bool,
    all_members_from_75: bool,
}

fn semigroup(header: Header, limit: usize) -> Result<Report, CliError> {
    let table = surface_semigroup(limit)?;
    let closure_holds = table.closure_violation().is_none();
    let conductor = table.conductor();
    let mut csv_body = String::new();
    for k in 1..=limit {
        writeln!(csv_body, "{k},{}", table.contains(k) == Some(true)).expect("writing to a string");
    }
    let csv = format!("# {}\nk,member\n{csv_body}", header.schema);
    let out = SemigroupOut {
        header,
        limit,
        generators_rule: GENERATORS_RULE,
        minimal_generators: table.minimal_generators().to_vec(),
        gaps: table.gaps(),
        conductor,
        closure_holds,
        all_members_from_75: conductor <= SURFACE_CONDUCTOR,
    };
    let status = if closure_holds && conductor == SURFACE_CONDUCTOR { Status::Ok } else { Status::InvariantViolated };
    Ok(Report { json: to_json(&out), csv, status })
}
