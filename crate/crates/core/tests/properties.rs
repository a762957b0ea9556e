use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use signet_core::basis::{biorthogonal_family, inner_product, norm, riesz_transform, riesz_transform_with, Weight};
use signet_core::func::PiecewiseFunction;
use signet_core::evolution::{evolve_heat, evolve_pseudo_schrodinger, evolve_schrodinger, SpectralState};
use signet_core::graph::{build_star, Boundary, Topology};
use signet_core::spectra::{
    det2_positivity, dispersion_general, spectrum_star_equilateral_pseudo, spectrum_star_equilateral_standard,
    spectrum_star_irrational_pseudo, spectrum_tadpole_pseudo, Family, Spectrum,
};
use signet_core::wellposed::resonance_verdict;

fn non_resonant(d: usize, n: usize, km: f64) -> bool {
    let r = d as f64 / (n - d) as f64;
    ((-km - r) / r).abs() > 1e-3
}

fn partition() -> impl Strategy<Value = (usize, usize, f64)> {
    (2usize..6).prop_flat_map(|n| (1..n, Just(n), 0.1f64..4.0)).prop_map(|(d, n, a)| (d, n, -a)).prop_filter("resonant", |&(d, n, k)| non_resonant(d, n, k))
}

fn states(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn max_diff(a: &SpectralState, b: &SpectralState) -> f64 {
    a.coefficients.iter().zip(&b.coefficients).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn det2_positive_on_same_sign(a in 1e-3f64..4.0, b in 1e-3f64..4.0, s in 1e-3f64..10.0, flip in any::<bool>()) {
        let (a, b) = if flip { (-a, -b) } else { (a, b) };
        prop_assert!(det2_positivity(a, b, s) > 0.0);
    }

    #[test]
    fn partition_summary_matches_construction(classes in prop::collection::vec(0usize..4, 2..=12), l in 0.2f64..3.0) {
        let k: Vec<f64> = classes.iter().map(|&c| if c < 2 { 1.5 } else { -0.7 }).collect();
        let b: Vec<Boundary> = classes.iter().map(|&c| if c % 2 == 0 { Boundary::Dirichlet } else { Boundary::Neumann }).collect();
        let net = build_star(&vec![l; classes.len()], &k, &b).unwrap();
        let p = net.partition_summary().unwrap();
        let count = |c: usize| classes.iter().filter(|&&x| x == c).count();
        prop_assert_eq!((p.nd_plus, p.nn_plus, p.nd_minus, p.nn_minus), (count(0), count(1), count(2), count(3)));
        prop_assert!(p.is_consistent());
        prop_assert_eq!(p.n, classes.len());
        let mixed = classes.iter().any(|c| c % 2 == 1);
        prop_assert_eq!(net.topology, if mixed { Topology::StarMixed } else { Topology::StarDirichlet });
        let mut again = net.clone();
        again.canonicalize();
        prop_assert_eq!(again, net);
    }

    #[test]
    fn dispersion_roots_lie_in_their_brackets((d, n, km) in partition()) {
        let s = spectrum_star_equilateral_standard(d, n, km, 6).unwrap();
        let sq = (-km).sqrt();
        for p in s.pairs() {
            let Some((lo, hi)) = p.bracket else { continue };
            let (scale, r, c) = match p.family {
                Family::DispersionB => (1.0, 1.0 / sq, sq * (n - d) as f64 / d as f64),
                Family::DispersionA => (km, sq, d as f64 / (sq * (n - d) as f64)),
                f => panic!("unexpected bracket on {f:?}"),
            };
            let mu = (p.lambda / scale).sqrt();
            prop_assert!(mu >= lo - 1e-12 && mu <= hi + 1e-12, "{mu} not in ({lo}, {hi})");
            let g = dispersion_general(mu, r, c);
            let slope = (dispersion_general(mu + 1e-6, r, c) - dispersion_general(mu - 1e-6, r, c)).abs() / 2e-6;
            prop_assert!(g.abs() < 1e-9 * slope.max(1.0), "{g}");
        }
    }

    #[test]
    fn inner_product_symmetric((d, n, km) in partition(), i in 0usize..12, j in 0usize..12) {
        let s = spectrum_star_equilateral_pseudo(d, n, km, 4).unwrap();
        let m = s.modes();
        let (f, g) = (m[i % m.len()].function, m[j % m.len()].function);
        let w = Weight::KWeighted(s.network.conductivities());
        for wt in [Weight::Plain, w] {
            let (a, b) = (inner_product(f, g, &wt).unwrap(), inner_product(g, f, &wt).unwrap());
            prop_assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn riesz_transform_round_trip((d, n, km) in partition()) {
        let s = spectrum_star_equilateral_pseudo(d, n, km, 5).unwrap();
        let back = riesz_transform_with(&riesz_transform(&s, km).unwrap(), 1.0 / km).unwrap();
        for (a, b) in s.modes().iter().zip(back.modes()) {
            for e in 0..n {
                for x in [0.13, 0.5, 0.91] {
                    // both sides are unit-norm, so the sign is fixed by continuity
                    prop_assert!((a.function.eval(e, x) - b.function.eval(e, x)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn schrodinger_group((d, n, km) in partition(), c in states(10), t1 in -2.0f64..2.0, t2 in -2.0f64..2.0) {
        let s = spectrum_star_equilateral_standard(d, n, km, 8).unwrap();
        let st = SpectralState::zero(&s, 10).unwrap().with_coefficients(c).unwrap();
        let a = evolve_schrodinger(&evolve_schrodinger(&st, t1).unwrap(), t2).unwrap();
        let b = evolve_schrodinger(&st, t1 + t2).unwrap();
        prop_assert!(max_diff(&a, &b) < 1e-12);
        prop_assert!((b.norm() - st.norm()).abs() < 1e-12 * st.norm().max(1.0));
    }

    #[test]
    fn heat_semigroup_and_decay((d, n, km) in partition(), c in states(12), t1 in 0.0f64..0.5, t2 in 0.0f64..0.5) {
        let s = spectrum_star_equilateral_standard(d, n, km, 8).unwrap();
        let st = SpectralState::zero(&s, 12).unwrap();
        // positive modes only: the flow is a contraction
        let c: Vec<Complex64> = c.iter().zip(&st.lambdas).map(|(&z, &l)| if l < 0.0 { Complex64::new(0.0, 0.0) } else { z }).collect();
        let st = st.with_coefficients(c).unwrap();
        let a = evolve_heat(&evolve_heat(&st, t1, None).unwrap(), t2, None).unwrap();
        let b = evolve_heat(&st, t1 + t2, None).unwrap();
        prop_assert!(max_diff(&a, &b) < 1e-12);
        let n1 = evolve_heat(&st, t1, None).unwrap().norm();
        prop_assert!(b.norm() <= n1 * (1.0 + 1e-12) && n1 <= st.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn mixed_signs_stay_resonant_iff_flux_sum_vanishes(k in prop::collection::vec(prop_oneof![0.2f64..3.0, -3.0f64..-0.2], 2..7)) {
        prop_assume!(k.iter().any(|&x| x > 0.0) && k.iter().any(|&x| x < 0.0));
        let n = k.len();
        let net = build_star(&vec![1.0; n], &k, &vec![Boundary::Dirichlet; n]).unwrap();
        let v = resonance_verdict(&net).unwrap();
        let sum: f64 = k.iter().sum();
        prop_assert!((v.critical_value.unwrap() - sum).abs() < 1e-12);
        prop_assert_eq!(v.well_posed, sum.abs() > 1e-9);
    }
}

#[test]
fn biorthogonal_family_is_stable_in_truncation() {
    let s = spectrum_star_equilateral_pseudo(2, 3, -0.5, 40).unwrap();
    let mut conds = Vec::new();
    for t in [10, 20, 30, 40] {
        let b = biorthogonal_family(&s, t).unwrap();
        assert!(b.residual < 1e-8, "{t}: {}", b.residual);
        conds.push(b.condition);
    }
    // a Riesz basis keeps the Gram condition bounded
    let (lo, hi) = conds.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    assert!(hi / lo < 1.5, "{conds:?}");
    // dual functions converge in L² (slowly) and stay inside the Riesz bound
    let fams: Vec<_> = [10, 20, 40].iter().map(|&t| biorthogonal_family(&s, t).unwrap()).collect();
    let drift = |a: usize, b: usize| {
        let d = PiecewiseFunction::linear_combination(&[1.0, -1.0], &[&fams[a].sigma[0], &fams[b].sigma[0]]).unwrap();
        norm(&d)
    };
    assert!(drift(1, 2) < drift(0, 1));
    for f in &fams {
        assert!(norm(&f.sigma[0]) <= f.condition.sqrt());
    }
}

#[test]
fn pseudo_schrodinger_is_bounded() {
    let s = spectrum_star_equilateral_pseudo(1, 3, -0.25, 20).unwrap();
    let st = SpectralState::zero(&s, 20).unwrap();
    let st = st.with_coefficients((0..20).map(|j| Complex64::new(1.0 / (j + 1) as f64, 0.0)).collect()).unwrap();
    let n0 = st.norm();
    for i in 0..=20 {
        let n = evolve_pseudo_schrodinger(&st, 0.05 * i as f64).unwrap().norm();
        assert!(n < 10.0 * n0 && n > 0.1 * n0);
    }
    assert!(evolve_schrodinger(&st, 1.0).is_err());
}

fn kweighted_offdiag(s: &Spectrum) -> f64 {
    let w = Weight::KWeighted(s.network.conductivities());
    let m = s.modes();
    let mut worst: f64 = 0.0;
    for i in 0..m.len() {
        for j in 0..i {
            if (m[i].lambda - m[j].lambda).abs() > 1e-8 * m[i].lambda.abs().max(1.0) {
                worst = worst.max(inner_product(m[i].function, m[j].function, &w).unwrap().abs());
            }
        }
    }
    worst
}

#[test]
fn tadpole_pseudo_modes_are_k_orthogonal() {
    let s = spectrum_tadpole_pseudo(1.0, 2f64.sqrt(), -0.5, 8).unwrap();
    assert!(kweighted_offdiag(&s) < 1e-10);
}

#[test]
fn irrational_pseudo_modes_are_k_orthogonal() {
    let s = spectrum_star_irrational_pseudo(&[1.0, 2f64.sqrt(), 3f64.sqrt()], 2, -0.5, 8).unwrap();
    assert!(kweighted_offdiag(&s) < 1e-10);
}

#[test]
fn pseudo_levels_are_quarter_squares() {
    for (d, n) in [(1, 2), (2, 3), (3, 5)] {
        let s = spectrum_star_equilateral_pseudo(d, n, -0.3, 8).unwrap();
        for (i, p) in s.positive.iter().enumerate() {
            let m = (i + 1) as f64;
            assert!((p.lambda - m * m * PI * PI / 4.0).abs() < 1e-10 * p.lambda);
            assert_eq!(p.multiplicity, if i % 2 == 0 { 1 } else { n - 1 });
        }
    }
}
