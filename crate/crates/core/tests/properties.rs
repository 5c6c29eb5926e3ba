//! Randomized invariants of the exact (non-quadrature) layers.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_complex::Complex64;
use num_rational::Ratio;
use proptest::prelude::*;

use plurinorm::asymptotics::PsiSamples;
use plurinorm::bounds::{mult_threshold, power_multiplicity_check, semigroup_inequality_check};
use plurinorm::charindex::{canonical_chart_order, local_char_index, CharIndex, GrowthOrder, MultiIndexPair};
use plurinorm::lattice::lattice_basis;
use plurinorm::poly::PolyMap;
use plurinorm::rational::{ExtRational, Rational};
use plurinorm::report::fmt_f64;
use plurinorm::resolution::{Divisor, ResolutionModel, Stratum};
use plurinorm::scenario::parse_scenario;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn float_rank(vs: &[Vec<i64>], n: usize) -> usize {
    let mut m: Vec<Vec<f64>> = vs.iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..m.len()).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())) else {
            break;
        };
        if m[p][col].abs() < 1e-9 {
            continue;
        }
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            let f = m[i][col] / m[rank][col];
            let pivot = m[rank].clone();
            for (x, y) in m[i].iter_mut().zip(&pivot) {
                *x -= f * y;
            }
        }
        rank += 1;
    }
    rank
}

fn vectors(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-12i64..=12, n), 0..6)
}

fn pair_strategy() -> impl Strategy<Value = MultiIndexPair> {
    (1usize..=4).prop_flat_map(|n| {
        (prop::collection::vec(0u32..=6, n), prop::collection::vec(0u32..=4, n))
            .prop_map(|(a, b)| MultiIndexPair::new(a, b).unwrap())
    })
}

fn char_index() -> impl Strategy<Value = CharIndex> {
    prop_oneof![
        1 => Just(CharIndex::EMPTY),
        10 => (1i128..=20, 1i128..=20, 1u32..=5)
            .prop_map(|(p, q, mu)| CharIndex::new(ExtRational::new(p, q).unwrap(), mu).unwrap()),
    ]
}

proptest! {
    #[test]
    fn lattice_coordinates_reconstruct_inputs(n in 1usize..=4, seed in any::<u64>()) {
        let vs: Vec<Vec<i64>> = (0..(seed % 5) as usize)
            .map(|i| (0..n).map(|j| ((seed >> (3 * (i * n + j) % 60)) % 19) as i64 - 9).collect())
            .collect();
        let l = lattice_basis(&vs, n);
        for (v, c) in vs.iter().zip(&l.coords) {
            let mut w = vec![0i64; n];
            for (ci, row) in c.iter().zip(&l.basis) {
                for (x, y) in w.iter_mut().zip(row) {
                    *x += ci * y;
                }
            }
            prop_assert_eq!(&w, v);
        }
    }

    #[test]
    fn lattice_rank_matches_real_rank(vs in (1usize..=4).prop_flat_map(|n| (Just(n), vectors(n)))) {
        let (n, vs) = vs;
        prop_assert_eq!(lattice_basis(&vs, n).rank(), float_rank(&vs, n));
    }

    #[test]
    fn one_dimensional_lattice_is_generated_by_the_gcd(xs in prop::collection::vec(-40i64..=40, 1..6)) {
        let vs: Vec<Vec<i64>> = xs.iter().map(|&x| vec![x]).collect();
        let g = xs.iter().fold(0, |acc, &x| gcd(acc, x));
        let l = lattice_basis(&vs, 1);
        if g == 0 {
            prop_assert_eq!(l.rank(), 0);
        } else {
            prop_assert_eq!(l.basis, vec![vec![g]]);
        }
    }

    #[test]
    fn planar_lattice_covolume_is_the_gcd_of_minors(vs in vectors(2)) {
        let l = lattice_basis(&vs, 2);
        if l.rank() == 2 {
            let mut g = 0;
            for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    g = gcd(g, vs[i][0] * vs[j][1] - vs[i][1] * vs[j][0]);
                }
            }
            let det = l.basis[0][0] * l.basis[1][1] - l.basis[0][1] * l.basis[1][0];
            prop_assert_eq!(det.abs(), g);
        }
    }

    #[test]
    fn char_index_order_is_a_total_order(x in char_index(), y in char_index(), z in char_index()) {
        let c = x.cmp(&y);
        prop_assert_eq!(c, y.cmp(&x).reverse());
        prop_assert_eq!(c == Ordering::Equal, x == y);
        if x > y && y > z {
            prop_assert!(x > z);
        }
        if !x.is_empty() {
            prop_assert!(x > CharIndex::EMPTY);
        }
        if let (ExtRational::Finite(a), ExtRational::Finite(b)) = (x.l, y.l) {
            prop_assert_eq!(c, b.cmp(&a).then(x.mu.cmp(&y.mu)));
        }
    }

    #[test]
    fn growth_order_agrees_with_numeric_dominance(
        p1 in 0i128..=8, p2 in 0i128..=8, l1 in 0u32..=2, l2 in 0u32..=2,
    ) {
        let x = GrowthOrder::new(Ratio::new(p1, 2), l1);
        let y = GrowthOrder::new(Ratio::new(p2, 2), l2);
        let t: f64 = 1e-40;
        let g = |p: i128, l: u32| (p as f64 / 2.0) * t.ln() + l as f64 * (1.0 / t).ln().ln();
        match x.cmp(&y) {
            Ordering::Greater => prop_assert!(g(p1, l1) > g(p2, l2)),
            Ordering::Less => prop_assert!(g(p1, l1) < g(p2, l2)),
            Ordering::Equal => prop_assert_eq!((p1, l1), (p2, l2)),
        }
    }

    #[test]
    fn local_index_is_permutation_invariant(pair in pair_strategy(), seed in any::<u64>()) {
        let n = pair.dim();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            perm.swap(i, (s % (i as u64 + 1)) as usize);
            s /= i as u64 + 1;
        }
        prop_assert_eq!(local_char_index(&pair), local_char_index(&pair.permuted(&perm)));
    }

    #[test]
    fn canonical_order_puts_minimizers_first(pair in pair_strategy()) {
        let idx = local_char_index(&pair);
        let perm = canonical_chart_order(&pair);
        let ls = pair.permuted(&perm).thresholds();
        prop_assert!(ls.windows(2).all(|w| w[0] <= w[1]));
        if !idx.is_empty() {
            prop_assert!(ls[..idx.mu as usize].iter().all(|&l| l == idx.l));
        }
        let sorted: BTreeSet<usize> = perm.iter().copied().collect();
        prop_assert_eq!(sorted.len(), pair.dim());
    }

    #[test]
    fn ext_rational_display_round_trips(p in 0i128..10_000, q in 1i128..10_000, inf in any::<bool>()) {
        let x = if inf { ExtRational::Infinite } else { ExtRational::new(p, q).unwrap() };
        prop_assert_eq!(x.to_string().parse::<ExtRational>(), Ok(x));
    }

    #[test]
    fn ext_rational_parser_never_panics(s in "\\PC{0,24}") {
        let _ = s.parse::<ExtRational>();
    }

    #[test]
    fn float_text_is_bit_exact(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        if x.is_finite() {
            let y: f64 = fmt_f64(x).parse().unwrap();
            prop_assert_eq!(y.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn poly_arithmetic_is_pointwise(
        e1 in prop::collection::vec((0u32..4, 0u32..4, -2.0f64..2.0, -2.0f64..2.0), 0..5),
        e2 in prop::collection::vec((0u32..4, 0u32..4, -2.0f64..2.0, -2.0f64..2.0), 0..5),
        z in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
        s in (-3.0f64..3.0, -3.0f64..3.0),
    ) {
        let mk = |e: &[(u32, u32, f64, f64)]| {
            PolyMap::new(2, e.iter().map(|&(i, j, re, im)| (vec![i, j], Complex64::new(re, im))).collect()).unwrap()
        };
        let (p, q) = (mk(&e1), mk(&e2));
        let z = [Complex64::new(z.0, z.1), Complex64::new(z.2, z.3)];
        let s = Complex64::new(s.0, s.1);
        let sum = p.add(&q).unwrap().eval(&z);
        let diff = p.sub(&q).unwrap().eval(&z);
        prop_assert!((sum - p.eval(&z) - q.eval(&z)).norm() < 1e-9);
        prop_assert!((diff - p.eval(&z) + q.eval(&z)).norm() < 1e-9);
        prop_assert!((p.scale(s).eval(&z) - s * p.eval(&z)).norm() < 1e-9);
    }

    #[test]
    fn mult_threshold_decreases_in_r_and_grows_in_n(n in 1u64..=6, r in 3u64..=200) {
        let here = mult_threshold(n, r).unwrap();
        prop_assert!(mult_threshold(n, r + 1).unwrap() < here);
        prop_assert!(mult_threshold(n + 1, r).unwrap() > here);
        prop_assert!(here > Rational::from_integer(2 * n as i128));
    }

    #[test]
    fn power_check_matches_its_closed_form(nu in 1u64..=40, m in 1u64..=40, n in 1u64..=5) {
        prop_assume!(nu * m > 2);
        let c = power_multiplicity_check(nu, m, n).unwrap();
        // ν > 2nνm/(νm−2) ⟺ ν(νm−2) > 2nνm ⟺ νm − 2 > 2nm
        prop_assert_eq!(c.holds, nu * m > 2 * n * m + 2);
        prop_assert_eq!(c.boundary, c.non_strict_reading && !c.strict_reading);
    }

    #[test]
    fn semigroup_inequality_gap_is_exact(x in 3u64..=2000, y in 3u64..=2000) {
        let (holds, gap) = semigroup_inequality_check(x, y).unwrap();
        let (x, y) = (x as i128, y as i128);
        // common denominator (x−2)(y−2)(x+y−2)
        let num = x * (y - 2) * (x + y - 2) + y * (x - 2) * (x + y - 2) - (x + y) * (x - 2) * (y - 2);
        prop_assert_eq!(gap, Ratio::new(num, (x - 2) * (y - 2) * (x + y - 2)));
        prop_assert!(holds);
    }

    #[test]
    fn samples_csv_round_trips(
        raw in prop::collection::vec((any::<f64>(), 0.0f64..1.0, any::<bool>()), 4..10),
    ) {
        let k = raw.len();
        let t: Vec<f64> = (0..k).map(|i| 0.3 * 0.5f64.powi(i as i32)).collect();
        let d: Vec<f64> = raw.iter().map(|r| if r.0.is_finite() { r.0 } else { 1.0 }).collect();
        let s = PsiSamples::new(
            t,
            d,
            raw.iter().map(|r| r.1).collect(),
            raw.iter().map(|r| r.2).collect(),
        ).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = PsiSamples::read_csv(buf.as_slice()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(back.t_values()), bits(s.t_values()));
        prop_assert_eq!(bits(back.delta_values()), bits(s.delta_values()));
        prop_assert_eq!(bits(back.err_ests()), bits(s.err_ests()));
        prop_assert_eq!(back.exhausted(), s.exhausted());
    }

    #[test]
    fn samples_csv_reader_never_panics(s in "\\PC{0,200}") {
        let _ = PsiSamples::read_csv(s.as_bytes());
    }

    #[test]
    fn scenario_parser_never_panics(s in "\\PC{0,200}") {
        let _ = parse_scenario(&s);
    }

    #[test]
    fn truncated_scenarios_fail_cleanly(cut in 0usize..2000) {
        let text = include_str!("../../../scenarios/blowup_chain.toml");
        let mut cut = cut.min(text.len());
        while !text.is_char_boundary(cut) {
            cut -= 1;
        }
        let _ = parse_scenario(&text[..cut]);
    }
}

/// A random simple normal crossing model: divisors with images among three
/// points, all singleton strata and some pairwise intersections.
#[derive(Clone, Debug)]
struct RandomModel {
    divisors: Vec<(u32, u32, u8)>,
    pairs: Vec<(usize, usize, u8)>,
}

fn random_model() -> impl Strategy<Value = RandomModel> {
    prop::collection::vec((1u32..=6, 0u32..=4, 1u8..8), 1..=5).prop_flat_map(|divisors| {
        let k = divisors.len();
        let pairs = prop::collection::vec((0..k, 0..k, 1u8..8), 0..=4);
        (Just(divisors), pairs).prop_map(|(divisors, pairs)| RandomModel { divisors, pairs })
    })
}

const POINTS: [&str; 3] = ["p", "q", "r"];

fn image(mask: u8) -> BTreeSet<String> {
    (0..3).filter(|i| mask & (1 << i) != 0).map(|i| POINTS[i].to_string()).collect()
}

fn build(spec: &RandomModel, extra: Option<(u32, u32, u8)>) -> ResolutionModel {
    let mut divs = spec.divisors.clone();
    divs.extend(extra);
    let divisors = divs
        .iter()
        .enumerate()
        .map(|(i, &(a, b, _))| Divisor { id: format!("E{i}"), a, b })
        .collect();
    let mut strata: Vec<Stratum> = divs
        .iter()
        .enumerate()
        .map(|(i, &(_, _, mask))| Stratum { divisors: BTreeSet::from([format!("E{i}")]), image: image(mask) })
        .collect();
    let mut seen = BTreeSet::new();
    for &(i, j, mask) in &spec.pairs {
        let key = (i.min(j), i.max(j));
        if i == j || !seen.insert(key) {
            continue;
        }
        let m = mask & divs[i].2 & divs[j].2;
        if m == 0 {
            continue;
        }
        strata.push(Stratum {
            divisors: BTreeSet::from([format!("E{i}"), format!("E{j}")]),
            image: image(m),
        });
    }
    ResolutionModel::new(divisors, strata, POINTS.iter().map(|p| p.to_string()).collect()).unwrap()
}

proptest! {
    #[test]
    fn indicatrix_routes_agree(spec in random_model()) {
        let model = build(&spec, None);
        prop_assert_eq!(model.characteristic_indicatrix().unwrap(), model.indicatrix_from_strata().unwrap());
    }

    #[test]
    fn global_lct_is_the_least_local_lct(spec in random_model()) {
        let model = build(&spec, None);
        let least = POINTS.iter().map(|p| model.local_lct(p).unwrap()).min().unwrap();
        prop_assert_eq!(model.global_lct(), least);
        for p in POINTS {
            let r = model.local_index(p).unwrap();
            if r.lct.is_finite() {
                prop_assert!(r.mu >= 1 && r.mu <= 2);
            } else {
                prop_assert_eq!(r.mu, 0);
            }
        }
    }

    #[test]
    fn a_less_singular_divisor_changes_nothing(spec in random_model(), a in 1u32..=6, mask in 1u8..8) {
        let model = build(&spec, None);
        let lct = model.global_lct().finite().unwrap();
        // smallest b making (b+1)/a exceed the threshold
        let mut b = 0u32;
        while Rational::new(b as i128 + 1, a as i128) <= lct {
            b += 1;
        }
        let bigger = build(&spec, Some((a, b, mask)));
        prop_assert_eq!(bigger.global_lct(), model.global_lct());
        prop_assert_eq!(bigger.characteristic_indicatrix().unwrap(), model.characteristic_indicatrix().unwrap());
    }

    #[test]
    fn multiplicity_audit_fails_past_n_over_lct(spec in random_model(), mult in 1u32..=20, n in 1u32..=3) {
        let model = build(&spec, None);
        for p in POINTS {
            if model.local_lct(p).unwrap().is_finite() {
                let lct = model.local_lct(p).unwrap().finite().unwrap();
                let holds = model.mult_bound_check(p, mult, n).unwrap();
                prop_assert_eq!(holds, Rational::from_integer(mult as i128) * lct <= Rational::from_integer(n as i128));
                if model.mult_bound_check(p, mult + 1, n).unwrap() {
                    prop_assert!(holds);
                }
            }
        }
    }
}
