use std::f64::consts::PI;

use heisenberg_sft::fan::{fan_dilate_point, fan_dilate_set, kappa, nu2_measure, FanBox, FanPoint, FanSet, Sign};
use heisenberg_sft::hgroup::{dilate, integrate, koranyi_norm, HGrid, HPoint, SampledField};
use heisenberg_sft::radial::{beurling_g, laguerre_coeff, RadialField, RadialGrid};
use heisenberg_sft::sft::forward;
use heisenberg_sft::specfun::{laguerre_all, norm_const};
use heisenberg_sft::suite::{Resolution, TestFunction};
use heisenberg_sft::uncertainty::{
    hs_bound_sq, hs_norm_exact, project_spatial, project_spectral, SetSampler, SpatialBox, SpatialSet,
    SpectralContext,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn arb_point(n: usize) -> impl Strategy<Value = HPoint> {
    (prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), n), -10.0..10.0f64)
        .prop_map(|(z, t)| HPoint::new(z.into_iter().map(|(a, b)| c(a, b)).collect(), t))
}

fn arb_sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus), Just(Sign::Both)]
}

fn arb_fan(n: usize) -> impl Strategy<Value = FanSet> {
    prop::collection::vec((0usize..6, 0.1..5.0f64, 0.05..3.0f64, arb_sign()), 1..5).prop_map(move |bs| {
        let boxes = bs.into_iter().map(|(k, lo, w, s)| FanBox::new(k, lo, lo + w, s).unwrap()).collect();
        FanSet::new(n, boxes).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn koranyi_norm_is_homogeneous(p in arb_point(2), i in 0usize..3) {
        let r = [0.1, 1.0, 7.0][i];
        let lhs = koranyi_norm(&dilate(r, &p).unwrap());
        let rhs = r * koranyi_norm(&p);
        prop_assert!((lhs - rhs).abs() <= 1e-14 * rhs.max(1e-300));
    }

    #[test]
    fn midpoint_rule_is_exact_on_multilinear_polynomials(a in prop::array::uniform8(-2.0..2.0f64)) {
        let g = HGrid::new(1, 1.7, 2.3, 7, 9).unwrap();
        let f = SampledField::from_fn(g, |z, t| {
            let (x, y) = (z[0].re, z[0].im);
            c(a[0] + a[1] * x + a[2] * y + a[3] * t + a[4] * x * y + a[5] * x * t + a[6] * y * t + a[7] * x * y * t, 0.0)
        });
        let exact = a[0] * g.volume();
        prop_assert!((integrate(&f).re - exact).abs() <= 1e-12 * g.volume() * (1.0 + a[0].abs()));
    }

    #[test]
    fn laguerre_three_term_recurrence(delta in 0.0..3.0f64, x in 0.0..60.0f64) {
        let l = laguerre_all(41, delta, x).unwrap();
        for k in 1..=40 {
            let kf = k as f64;
            let terms = [(kf + 1.0) * l[k + 1], (2.0 * kf + delta + 1.0 - x) * l[k], (kf + delta) * l[k - 1]];
            let res = terms[0] - terms[1] + terms[2];
            let scale = terms.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(res.abs() <= 1e-10 * scale.max(1e-300), "k={} res={}", k, res);
        }
    }

    #[test]
    fn fan_measures_are_additive_over_disjoint_boxes(w1 in arb_fan(1), shift in 0.1..2.0f64) {
        // the second set lives entirely above the first
        let top = w1.max_lambda() + shift;
        let w2 = FanSet::new(1, vec![FanBox::new(2, top, top + 1.0, Sign::Both).unwrap()]).unwrap();
        let both = FanSet::new(1, w1.boxes().iter().chain(w2.boxes()).cloned().collect()).unwrap();
        let tol = |x: f64| 1e-14 * x.max(1.0) * 4.0;
        prop_assert!((nu2_measure(&both) - nu2_measure(&w1) - nu2_measure(&w2)).abs() <= tol(nu2_measure(&both)));
        prop_assert!((kappa(&both) - kappa(&w1) - kappa(&w2)).abs() <= tol(kappa(&both)));
    }

    #[test]
    fn fan_dilation_maps_points_and_sets_together(
        w in arb_fan(2), lambda in -8.0..8.0f64, k in 0usize..6, r in 0.3..3.0f64,
    ) {
        prop_assume!(lambda.abs() > 1e-6);
        let a = FanPoint::finite(lambda, k).unwrap();
        let dw = fan_dilate_set(r, &w).unwrap();
        let da = fan_dilate_point(r, &a).unwrap();
        // skip points that round across a box edge
        let near_edge = w.boxes().iter().any(|b| (lambda.abs() - b.lo).abs() < 1e-9 || (lambda.abs() - b.hi).abs() < 1e-9);
        prop_assume!(!near_edge);
        prop_assert_eq!(w.contains(&a), dw.contains(&da));
    }

    #[test]
    fn kappa_is_bounded_by_gap_times_nu2(w in arb_fan(1), w2 in arb_fan(2)) {
        for w in [w, w2] {
            let n = w.n as i32;
            let bound = (2.0 * PI).powi(n) * w.gap().powi(-n) * nu2_measure(&w);
            prop_assert!(kappa(&w) <= bound);
        }
    }

    #[test]
    fn norm_constants_are_in_unit_interval_and_decrease(n in 1usize..4) {
        let cs: Vec<f64> = (0..40).map(|k| norm_const(n, k)).collect();
        prop_assert!(cs.iter().all(|&x| x > 0.0 && x <= 1.0));
        prop_assert!(cs.windows(2).all(|p| p[1] <= p[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hs_closed_form_and_bound(seed in any::<u64>(), n in 1usize..=2) {
        let s = SetSampler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = s.spatial(n, &mut rng).unwrap();
        let w = s.fan(n, &mut rng).unwrap();
        let hs2 = hs_norm_exact(&v, &w).powi(2);
        prop_assert!((hs2 - v.volume() * kappa(&w)).abs() <= 1e-12 * hs2);
        prop_assert!(hs2 < hs_bound_sq(&v, &w));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn forward_is_linear(ar in -2.0..2.0f64, ai in -2.0..2.0f64, lambda in 1.0..4.0f64, k in 0usize..4, wr in -1.0..1.0f64) {
        let g = HGrid::new(1, 4.0, 6.0, 17, 24).unwrap();
        let f = TestFunction::Gauss.sample(g);
        let h = TestFunction::Shifted.sample(g);
        let alpha = c(ar, ai);
        let comb = f.scale(alpha).add(&h).unwrap();
        let a = FanPoint::finite(lambda, k).unwrap();
        let w = [c(wr, 0.3)];
        let lhs = forward(&comb, &a, &w).unwrap();
        let rhs = alpha * forward(&f, &a, &w).unwrap() + forward(&h, &a, &w).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn spatial_projection_is_idempotent(seed in any::<u64>()) {
        let g = Resolution::default_n1().hgrid().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = SetSampler::default().spatial(1, &mut rng).unwrap();
        let f = TestFunction::Shifted.sample(g);
        let once = project_spatial(&f, &v).unwrap();
        let twice = project_spatial(&once, &v).unwrap();
        prop_assert_eq!(once.values, twice.values);
    }

    #[test]
    fn radial_g_is_nonnegative_and_coefficients_conjugate(t in -6.0..6.0f64, lambda in 0.5..6.0f64, k in 0usize..6) {
        let g = Resolution::default_n1().hgrid().unwrap();
        let rg = RadialGrid::matching(&g).unwrap();
        let f = RadialField::from_test_function(rg, TestFunction::RealCos).unwrap();
        prop_assert!(beurling_g(&f, t, lambda).unwrap() >= 0.0);
        let a = laguerre_coeff(&f, lambda, k).unwrap();
        let b = laguerre_coeff(&f, -lambda, k).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Cell-aligned `W`: every fan cell is either inside or outside.
    #[test]
    fn spectral_projection_is_nearly_idempotent_on_aligned_sets(
        k_top in 0usize..4, i in 0usize..16, j in 1usize..8, sign in arb_sign(),
    ) {
        let r = Resolution::default_n1();
        let g = r.hgrid().unwrap();
        let ctx = SpectralContext::from_resolution(&r).unwrap();
        let lo = r.fan.gap + 0.25 * i as f64;
        let hi = (lo + 0.25 * j as f64).min(r.fan.lambda_max);
        let w = FanSet::new(1, (0..=k_top).map(|k| FanBox::new(k, lo, hi, sign).unwrap()).collect()).unwrap();
        let f = TestFunction::Gauss.sample(g);
        let once = project_spectral(&f, &w, &ctx).unwrap();
        let twice = project_spectral(&once, &w, &ctx).unwrap();
        prop_assert!(twice.sub(&once).unwrap().l2_norm() <= 0.02 * f.l2_norm());
    }

    /// General `W`: a straddled cell acts as multiplication by its covered fraction
    /// `φ`, so the defect per cell is at most `φ(1 − φ) ≤ 1/4`.
    #[test]
    fn spectral_projection_defect_is_bounded_by_edge_cells(seed in any::<u64>()) {
        let r = Resolution::default_n1();
        let g = r.hgrid().unwrap();
        let ctx = SpectralContext::from_resolution(&r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = SetSampler::default().fan(1, &mut rng).unwrap();
        let f = TestFunction::Gauss.sample(g);
        let once = project_spectral(&f, &w, &ctx).unwrap();
        let twice = project_spectral(&once, &w, &ctx).unwrap();
        prop_assert!(twice.sub(&once).unwrap().l2_norm() <= (0.25 + 0.02) * f.l2_norm());
    }
}

#[test]
fn spatial_box_sets_are_reported_through_the_group_dimension() {
    let v = SpatialSet::in_group(1, vec![SpatialBox::cube(3, 1.0).unwrap()]).unwrap();
    assert_eq!(v.volume(), 8.0);
}
