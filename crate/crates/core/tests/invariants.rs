//! Property tests for the cross-module invariants.

use proptest::prelude::*;
use ripot::grid::{divergence, make_divfree_family, make_field, mollify, FamilyConfig, FieldDescriptor, Mollifier};
use ripot::interpolation::{holmstedt, k_functional_bruteforce, Couple, KQuery};
use ripot::operators::{project, riesz, RieszKernelSpec};
use ripot::rearrange::{decreasing_rearrangement, hardy_majorization_check, Profile};
use ripot::spaces::{norm, SpaceSpec, Variant};
use ripot::verify::{classify, run_counterexample_lz, window_factor, Row, Trend, BOUNDED_FACTOR, BOUNDED_WINDOW};

fn step_profile() -> impl Strategy<Value = Profile> {
    prop::collection::vec((0.01f64..10.0, 0.05f64..4.0), 1..8).prop_map(|mut parts| {
        parts.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (v, w): (Vec<f64>, Vec<f64>) = parts.into_iter().unzip();
        Profile::from_widths(&v, &w, f64::INFINITY).unwrap()
    })
}

fn spaces() -> Vec<SpaceSpec> {
    vec![
        SpaceSpec::lebesgue(1.0),
        SpaceSpec::lebesgue(2.5),
        SpaceSpec::lebesgue(f64::INFINITY),
        SpaceSpec::lorentz_star(2.0, 1.0),
        SpaceSpec::lorentz_maximal(3.0, 2.0),
        SpaceSpec::lorentz_zygmund(2.0, 1.0, 0.5, Variant::Star),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rearrangement_preserves_power_sums(seed in 0u64..1000, side in 8usize..24) {
        let f = make_field(&FieldDescriptor::RandomCells { seed, components: 2 }, 2, side, 1.0).unwrap();
        let p = decreasing_rearrangement(&f);
        let m = f.cell_measure();
        let mag = f.magnitude();
        let l1: f64 = mag.iter().map(|v| v * m).sum();
        let l2: f64 = mag.iter().map(|v| v * v * m).sum();
        prop_assert!((p.integral_to(f64::INFINITY) - l1).abs() <= 1e-12 * l1);
        let sq: f64 = p.values().iter().zip(p.breakpoints()).scan(0.0, |lo, (v, &b)| {
            let w = b - *lo;
            *lo = b;
            Some(v * v * w)
        }).sum();
        prop_assert!((sq - l2).abs() <= 1e-12 * l2);
        for &t in mag.iter().step_by(5) {
            let count = mag.iter().filter(|&&v| v > t).count();
            prop_assert!((p.measure_above(t) - count as f64 * m).abs() <= 1e-12);
        }
    }

    #[test]
    fn mollification_is_majorized(seed in 0u64..1000, h in 1usize..4) {
        let f = make_field(&FieldDescriptor::RandomCells { seed, components: 1 }, 2, 16, 1.0).unwrap();
        let rho = Mollifier::new(h, 2, 16, 1.0).unwrap();
        let g = mollify(&f, &rho).unwrap();
        prop_assert!(hardy_majorization_check(&decreasing_rearrangement(&g), &decreasing_rearrangement(&f)));
    }

    #[test]
    fn norms_scale_and_respect_hardy_lemma(f in step_profile(), c in 0.1f64..10.0, bump in 0.0f64..5.0, width in 0.01f64..1.0) {
        let g = f.add(&Profile::indicator(bump, width, f64::INFINITY).unwrap()).unwrap();
        prop_assert!(hardy_majorization_check(&f, &g));
        let cf = f.scale(c).unwrap();
        for x in spaces() {
            let nf = norm(&x, &f).unwrap();
            prop_assert!((norm(&x, &cf).unwrap() - c * nf).abs() <= 1e-12 * c * nf);
            prop_assert!(nf <= norm(&x, &g).unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn l1_linf_k_functional_is_truncation(f in step_profile(), t in 0.01f64..20.0) {
        let k = k_functional_bruteforce(&f, &KQuery::new(Couple::L1Linf, t).unwrap()).unwrap();
        let exact = f.integral_to(t);
        prop_assert!((k - exact).abs() <= 1e-12 * exact);
    }

    #[test]
    fn holmstedt_is_monotone_and_concave_for_q1(f in step_profile(), p in 1.5f64..4.0) {
        let ts: Vec<f64> = (0..24).map(|k| 0.01 * 1.4f64.powi(k)).collect();
        let hs: Vec<f64> = ts.iter().map(|&t| holmstedt(&f, p, 1.0, t).unwrap()).collect();
        for w in hs.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
        let scale = hs.last().copied().unwrap();
        for k in 1..ts.len() - 1 {
            let (a, b, c) = (ts[k - 1], ts[k], ts[k + 1]);
            let chord = hs[k - 1] + (hs[k + 1] - hs[k - 1]) * (b - a) / (c - a);
            prop_assert!(hs[k] >= chord - 1e-9 * scale);
        }
    }

    #[test]
    fn projection_is_idempotent_and_self_adjoint(seed in 0u64..1000) {
        let a = make_field(&FieldDescriptor::RandomModes { seed, modes: 5, components: 2 }, 2, 32, 1.0).unwrap();
        let b = make_field(&FieldDescriptor::RandomModes { seed: seed + 5000, modes: 5, components: 2 }, 2, 32, 1.0).unwrap();
        let (pa, pb) = (project(&a).unwrap(), project(&b).unwrap());
        prop_assert!(project(&pa).unwrap().max_diff(&pa).unwrap() <= 1e-10);
        let (l, r) = (pa.dot(&b).unwrap(), a.dot(&pb).unwrap());
        prop_assert!((l - r).abs() <= 1e-9 * (1.0 + l.abs()));
    }

    #[test]
    fn riesz_is_homogeneous(c in -4.0f64..4.0, alpha in 0.3f64..1.7) {
        let f = make_field(&FieldDescriptor::ScaledBump { lambda: 1.0, radius: 0.2, center: None }, 2, 32, 1.0).unwrap();
        let spec = RieszKernelSpec::new(alpha);
        let a = riesz(&f.scale(c), &spec).unwrap();
        let b = riesz(&f, &spec).unwrap().scale(c);
        prop_assert!(a.max_diff(&b).unwrap() <= 1e-13 * (1.0 + b.max_abs()));
    }

    #[test]
    fn trend_verdicts_are_consistent(ratios in prop::collection::vec(0.01f64..100.0, 3..7)) {
        let rows: Vec<Row> = ratios.iter().enumerate().map(|(k, &r)| Row::new("", 2f64.powi(k as i32), 1.0, r)).collect();
        match classify(&rows).0 {
            Trend::Bounded => prop_assert!(window_factor(&rows, BOUNDED_WINDOW) <= BOUNDED_FACTOR),
            Trend::Divergent => prop_assert!(rows.windows(2).all(|w| w[1].ratio > w[0].ratio)),
            Trend::Inconclusive => {}
        }
    }
}

#[test]
fn divfree_family_has_no_divergence() {
    let fam = make_divfree_family(&[1.0, 2.0, 4.0], &FamilyConfig::new(2, 64)).unwrap();
    for f in fam {
        assert!(divergence(&f).unwrap().max_abs() <= 1e-10);
    }
}

#[test]
fn counterexample_is_stable_under_refinement() {
    let eps = [1e-2, 1e-4, 1e-8];
    let a = run_counterexample_lz(2, 1.0, 1.0, 0.0, 2.5, &eps, 8).unwrap();
    let b = run_counterexample_lz(2, 1.0, 1.0, 0.0, 2.5, &eps, 16).unwrap();
    assert_eq!(a.trend, b.trend);
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!((x.norm_y / y.norm_y - 1.0).abs() < 0.01);
        assert!((x.norm_x / y.norm_x - 1.0).abs() < 0.01);
    }
}
