//! Symmetries and structural laws of the quadrature layer, checked on small
//! models where each law has an exact statement.

use num_complex::Complex64;
use proptest::prelude::*;

use plurinorm::asymptotics::{case1_ratios, classify_case, sample_psi, ExpansionCase};
use plurinorm::charindex::{local_char_index, MultiIndexPair};
use plurinorm::integrator::{
    hermitian_pairing, pairing_truncations, psi, psi_delta, LocalIntegrand, Pairing, QuadratureConfig,
};
use plurinorm::poly::PolyMap;
use plurinorm::scenario::{parse_scenario, ScenarioBody};
use plurinorm::weight::WeightFn;

fn cfg() -> QuadratureConfig {
    QuadratureConfig { radial_nodes: 15, angular_nodes: 15, max_depth: 40, rel_tol: 1e-9, abs_floor: 1e-30 }
}

fn cfg2() -> QuadratureConfig {
    QuadratureConfig { rel_tol: 1e-6, ..cfg() }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn poly(n: usize, terms: &[(&[u32], Complex64)]) -> PolyMap {
    PolyMap::new(n, terms.iter().map(|(e, k)| (e.to_vec(), *k)).collect()).unwrap()
}

fn local(a: &[u32], b: &[u32], m: u32, phi: PolyMap, chi: WeightFn) -> LocalIntegrand {
    LocalIntegrand::new(MultiIndexPair::new(a.to_vec(), b.to_vec()).unwrap(), m, phi, chi).unwrap()
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1e-300)
}

#[test]
fn swapping_coordinates_leaves_psi_unchanged() {
    // one monomial keeps the angular lattice at rank one
    let phi = poly(2, &[(&[1, 2], c(0.3, 0.7))]);
    let chi = WeightFn::separable_bump(1.5, vec![0.9, 0.6]).unwrap();
    let f = local(&[2, 3], &[0, 1], 3, phi, chi);
    let g = f.permuted(&[1, 0]);
    for t in [c(0.02, 0.0), c(0.001, 0.003)] {
        let x = psi(&f, t, &cfg2()).unwrap();
        let y = psi(&g, t, &cfg2()).unwrap();
        assert!(close(x.value, y.value, 1e-5), "{} vs {}", x.value, y.value);
    }
}

#[test]
fn rotating_t_is_absorbed_by_a_coordinate_rotation() {
    // φ is constant and a ≠ 0, so z ↦ e^{iθ/a} z turns t into t·e^{iθ}
    let phi = PolyMap::constant(1, c(0.6, -0.3));
    let f = local(&[3], &[1], 4, phi, WeightFn::separable_bump(1.0, vec![0.8]).unwrap());
    let base = psi_delta(&f, c(0.05, 0.0), &cfg()).unwrap();
    for theta in [0.3, 1.7, -2.9] {
        let rotated = psi_delta(&f, Complex64::from_polar(0.05, theta), &cfg()).unwrap();
        assert!(close(base.value, rotated.value, 1e-7), "θ = {theta}: {} vs {}", base.value, rotated.value);
    }
}

#[test]
fn psi_is_linear_in_the_weight() {
    let phi = poly(1, &[(&[0], c(1.0, 0.0)), (&[1], c(0.5, 0.5))]);
    let w1 = WeightFn::radial_polynomial(1, vec![(vec![0], 1.0), (vec![1], -0.5)]).unwrap();
    let w2 = WeightFn::radial_polynomial(1, vec![(vec![2], 2.0)]).unwrap();
    let w12 = WeightFn::radial_polynomial(1, vec![(vec![0], 1.0), (vec![1], -0.5), (vec![2], 2.0)]).unwrap();
    let t = c(0.03, 0.0);
    let at = |w: WeightFn| psi(&local(&[5], &[0], 3, phi.clone(), w), t, &cfg()).unwrap().value;
    let (x, y, xy) = (at(w1), at(w2), at(w12));
    assert!(close(xy, x + y, 1e-8), "{xy} vs {}", x + y);
}

#[test]
fn vanishing_perturbation_gives_zero_difference() {
    let f = local(&[2], &[1], 3, PolyMap::zero(1), WeightFn::constant(1.0).unwrap());
    assert_eq!(psi_delta(&f, c(0.1, 0.0), &cfg()).unwrap().value, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pairing_is_conjugate_symmetric(
        a in 0u32..=3, b in 0u32..=2, m in 3u32..=6,
        c1 in prop::collection::vec((0u32..3, -1.0f64..1.0, -1.0f64..1.0), 1..4),
        c2 in prop::collection::vec((0u32..3, -1.0f64..1.0, -1.0f64..1.0), 1..4),
    ) {
        let mk = |cs: &[(u32, f64, f64)]| {
            PolyMap::new(1, cs.iter().map(|&(k, re, im)| (vec![k], c(re, im))).collect()).unwrap()
        };
        let (p1, p2) = (mk(&c1), mk(&c2));
        let base = local(&[a], &[b], m, PolyMap::zero(1), WeightFn::separable_bump(1.0, vec![0.9]).unwrap());
        let h12 = hermitian_pairing(&base, &p1, &p2, &cfg()).unwrap();
        let h21 = hermitian_pairing(&base, &p2, &p1, &cfg()).unwrap();
        match (h12, h21) {
            (Pairing::Value(x), Pairing::Value(y)) => {
                let scale = x.value.norm().max(1e-12);
                prop_assert!((x.value - y.value.conj()).norm() <= 1e-7 * scale + x.err + y.err);
            }
            (Pairing::Divergent(_), Pairing::Divergent(_)) => {}
            _ => prop_assert!(false, "divergence is not symmetric"),
        }
    }
}

#[test]
fn divergent_pairings_blow_up_under_truncation() {
    // exponent of r near 0 is 2k + 2a(1/m − 1) + 1: −5/3 for k = 0, 1/3 for k = 1
    let base = local(&[2], &[0], 3, PolyMap::zero(1), WeightFn::constant(1.0).unwrap());
    let cutoffs = [1e-2, 1e-3, 1e-4, 1e-5];

    let one = PolyMap::constant(1, c(1.0, 0.0));
    assert!(matches!(hermitian_pairing(&base, &one, &one, &cfg()).unwrap(), Pairing::Divergent(_)));
    let tr = pairing_truncations(&base, &one, &one, &cutoffs, &cfg()).unwrap();
    for w in tr.windows(2) {
        // ∫_ε r^{−5/3} dr grows like ε^{−2/3}, a factor 10^{2/3} per decade
        assert!(w[1].value.re > 4.0 * w[0].value.re, "{} then {}", w[0].value.re, w[1].value.re);
    }

    let z = PolyMap::monomial(vec![1], c(1.0, 0.0));
    let Pairing::Value(full) = hermitian_pairing(&base, &z, &z, &cfg()).unwrap() else {
        panic!("z·z̄ pairing should converge");
    };
    let tr = pairing_truncations(&base, &z, &z, &cutoffs, &cfg()).unwrap();
    let gaps: Vec<f64> = tr.iter().map(|e| (e.value - full.value).norm()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    assert!(gaps[3] < 1e-6 * full.value.norm());
}

#[test]
fn case_one_ratios_stay_bounded() {
    let text = include_str!("../../../scenarios/psi_n1_case1.toml");
    let ScenarioBody::LocalPsi(s) = parse_scenario(text).unwrap().body else {
        panic!("local-psi scenario expected");
    };
    let pair = s.integrand.pair();
    assert_eq!(classify_case(pair, s.integrand.m()).unwrap().case, ExpansionCase::Case1);
    let mut sweep = s.sweep;
    sweep.count = 10;
    let samples = sample_psi(&s.integrand, &sweep, &s.quadrature).unwrap();
    let ratios = case1_ratios(&samples, local_char_index(pair).mu);
    assert!(ratios.iter().all(|r| r.is_finite()), "ratios {ratios:?}");
    // an unbounded ratio would grow along the sweep; here the supremum sits at the start
    let hi = ratios.iter().copied().fold(0.0f64, f64::max);
    assert!(hi <= ratios[0] * (1.0 + 1e-9), "ratios {ratios:?}");
}
