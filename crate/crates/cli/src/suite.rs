//! The `suite` subcommand: seeded property checks over random inputs.

use std::cmp::Ordering;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use plurinorm::bounds::{semigroup_inequality_check, surface_semigroup};
use plurinorm::charindex::{compare_char_index, CharIndex};
use plurinorm::integrator::QuadratureConfig;
use plurinorm::poly::PolyMap;
use plurinorm::pseudonorm::{pseudonorm, scaling_residual, triangle_residual, Chart, CoverModel, SectionModel};
use plurinorm::rational::{ExtRational, Rational};
use plurinorm::report::{fmt_f64, Num};
use plurinorm::scenario::{PseudonormLawsSpec, SuiteScenario};

use crate::{csv_text, to_json, CliError, Header, Report, Status};

#[derive(Serialize)]
struct CheckOut {
    name: &'static str,
    pass: bool,
    cases: usize,
    /// Largest violation margin observed; nonpositive when the check passes.
    worst: Option<Num>,
    detail: String,
}

#[derive(Serialize)]
struct SuiteOut {
    #[serde(flatten)]
    header: Header,
    seed: u64,
    checks: Vec<CheckOut>,
}

pub(crate) fn run_suite(header: Header, s: &SuiteScenario) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut checks = Vec::new();
    if let Some(pairs) = s.char_order_pairs {
        checks.push(char_order(&mut rng, pairs));
    }
    let mut exhausted = false;
    if let Some(spec) = &s.pseudonorm_laws {
        let (check, ex) = pseudonorm_laws(&mut rng, spec, &s.quadrature)?;
        exhausted = ex;
        checks.push(check);
    }
    if let Some(limit) = s.semigroup_limit {
        checks.push(semigroup_check(limit)?);
    }
    if let Some(max) = s.inequality_max {
        checks.push(inequality_check(max)?);
    }
    let pass = checks.iter().all(|c| c.pass);
    let csv = csv_text(
        &header.schema,
        &["check", "pass", "cases", "worst", "detail"],
        checks.iter().map(|c| {
            vec![
                c.name.to_string(),
                c.pass.to_string(),
                c.cases.to_string(),
                c.worst.map_or_else(String::new, |w| fmt_f64(w.0)),
                c.detail.clone(),
            ]
        }),
    );
    let status = if !pass {
        Status::InvariantViolated
    } else if exhausted {
        Status::BudgetExhausted
    } else {
        Status::Ok
    };
    let out = SuiteOut { header, seed: s.seed, checks };
    Ok(Report { json: to_json(&out), csv, status })
}

fn random_index(rng: &mut ChaCha8Rng) -> CharIndex {
    if rng.gen_ratio(1, 20) {
        return CharIndex::EMPTY;
    }
    let l = Ratio::new(rng.gen_range(1..=12i128), rng.gen_range(1..=12i128));
    CharIndex::new(ExtRational::Finite(l), rng.gen_range(1..=4)).expect("finite l with mu >= 1")
}

/// The order spelled out: equal thresholds and larger multiplicity, or a
/// smaller threshold. The empty index sits below everything.
fn definition_order(x: &CharIndex, y: &CharIndex) -> Ordering {
    match (x.l, y.l) {
        (ExtRational::Infinite, ExtRational::Infinite) => Ordering::Equal,
        (ExtRational::Infinite, _) => Ordering::Less,
        (_, ExtRational::Infinite) => Ordering::Greater,
        (ExtRational::Finite(a), ExtRational::Finite(b)) => b.cmp(&a).then(x.mu.cmp(&y.mu)),
    }
}

fn char_order(rng: &mut ChaCha8Rng, pairs: usize) -> CheckOut {
    let mut failures = 0;
    for _ in 0..pairs {
        let (x, y, z) = (random_index(rng), random_index(rng), random_index(rng));
        let c = compare_char_index(&x, &y);
        let mut ok = c == definition_order(&x, &y)
            && c == compare_char_index(&y, &x).reverse()
            && (c == Ordering::Equal) == (x == y);
        if c == Ordering::Greater && compare_char_index(&y, &z) == Ordering::Greater {
            ok &= compare_char_index(&x, &z) == Ordering::Greater;
        }
        failures += usize::from(!ok);
    }
    CheckOut {
        name: "char-index-order",
        pass: failures == 0,
        cases: pairs,
        worst: None,
        detail: format!("{failures} random triples violate trichotomy, antisymmetry or transitivity"),
    }
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_degree: u32, max_terms: usize) -> PolyMap {
    let count = rng.gen_range(1..=max_terms);
    let terms = (0..count)
        .map(|_| {
            let e = (0..n).map(|_| rng.gen_range(0..=max_degree)).collect();
            (e, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        })
        .collect();
    PolyMap::new(n, terms).expect("exponents have length n")
}

fn pseudonorm_laws(
    rng: &mut ChaCha8Rng,
    spec: &PseudonormLawsSpec,
    cfg: &QuadratureConfig,
) -> Result<(CheckOut, bool), CliError> {
    let mut worst = f64::NEG_INFINITY;
    let (mut cases, mut failures, mut exhausted) = (0usize, 0usize, false);
    for &m in &spec.ms {
        let charts = spec
            .charts
            .iter()
            .map(|(id, w, b)| Chart { id: id.clone(), weight: w.clone(), b: b.clone() })
            .collect();
        let cover = Arc::new(CoverModel::new(m, spec.n, charts)?);
        let section = |rng: &mut ChaCha8Rng| {
            let nums = (0..spec.charts.len()).map(|_| random_poly(rng, spec.n, spec.max_degree, spec.max_terms)).collect();
            SectionModel::new(Arc::clone(&cover), nums)
        };

        let base = section(rng)?;
        for &c in &spec.scales {
            let r = scaling_residual(&base, c, cfg)?;
            worst = worst.max(r.value - r.tolerance);
            failures += usize::from(!r.within_tolerance());
            exhausted |= r.exhausted;
            cases += 1;
        }
        for _ in 0..spec.pairs {
            let (s1, s2) = (section(rng)?, section(rng)?);
            let r = triangle_residual(&s1, &s2, cfg)?;
            worst = worst.max(r.value - r.tolerance);
            failures += usize::from(!r.within_tolerance());
            exhausted |= r.exhausted;
            cases += 1;
        }
        let zero = pseudonorm(&SectionModel::zero(Arc::clone(&cover)), cfg)?;
        failures += usize::from(zero.value != 0.0);
        let v = pseudonorm(&base, cfg)?;
        failures += usize::from(base.is_zero() || v.value <= 10.0 * v.err);
        cases += 2;
    }
    let check = CheckOut {
        name: "pseudonorm-laws",
        pass: failures == 0,
        cases,
        worst: Some(Num(worst)),
        detail: format!("{failures} scaling, triangle or zero-law cases outside tolerance"),
    };
    Ok((check, exhausted))
}

fn semigroup_check(limit: usize) -> Result<CheckOut, CliError> {
    let table = surface_semigroup(limit)?;
    let closure = table.closure_violation();
    let conductor = table.conductor();
    let pass = closure.is_none() && conductor == 75 && table.contains(74) == Some(false);
    Ok(CheckOut {
        name: "semigroup-closure",
        pass,
        cases: limit,
        worst: None,
        detail: match closure {
            None => format!("closed under addition up to {limit}; conductor {conductor}"),
            Some((x, y)) => format!("{x} + {y} is missing; conductor {conductor}"),
        },
    })
}

fn inequality_check(max: u64) -> Result<CheckOut, CliError> {
    let mut failures = 0;
    let mut smallest_gap: Option<Rational> = None;
    for x in 3..=max {
        for y in 3..=max {
            let (holds, gap) = semigroup_inequality_check(x, y)?;
            failures += usize::from(!holds);
            smallest_gap = Some(smallest_gap.map_or(gap, |g| g.min(gap)));
        }
    }
    let side = (max - 2) as usize;
    Ok(CheckOut {
        name: "semigroup-inequality",
        pass: failures == 0,
        cases: side * side,
        worst: None,
        detail: format!(
            "{failures} failures on [3, {max}]^2; smallest gap {}",
            smallest_gap.map_or_else(|| "none".to_string(), |g| g.to_string())
        ),
    })
}
