use nalgebra::DMatrix;
use proptest::prelude::*;

use qem::bounds::{
    d_m, ht_thresholds, mixed_osc_bound, mixed_profile, osc_bound, volume_bound, BoundsInput, QeOrder, VolumeBound,
};
use qem::comparison::{
    cosh_envelope_check, cosine_envelope_check, integrate_u, synthetic_profile, CheckStatus, ComparisonParams,
    SyntheticRic, DEFAULT_TOL,
};
use qem::fixtures::{build, cp2_fubini_study, round_sphere, s2xs2, FixtureSpec};
use qem::sum::pairwise_sum;
use qem::tensor::{curvature, CurvatureBundle, Interval, MetricChart};

/// Metric `delta + a sym(x x^T) + b diag(sin x)` on a small box; positive for |a|, |b| < 0.2.
fn polynomial_chart(a: f64, b: f64) -> MetricChart {
    MetricChart::new("poly", vec![Interval::new(-1.0, 1.0); 4], move |x| {
        DMatrix::from_fn(4, 4, |i, j| {
            let d = if i == j { 1.0 + b * x[i].sin() } else { 0.0 };
            d + a * x[i] * x[j] * 0.5
        })
    })
    .unwrap()
}

fn check_algebra(b: &CurvatureBundle, tol: f64) -> Result<(), TestCaseError> {
    let r = &b.riemann;
    let scale = r.max_abs().max(1.0);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let v = r.get(i, j, k, l);
                    prop_assert!((v + r.get(j, i, k, l)).abs() <= tol * scale);
                    prop_assert!((v + r.get(i, j, l, k)).abs() <= tol * scale);
                    prop_assert!((v - r.get(k, l, i, j)).abs() <= tol * scale);
                    let bianchi = v + r.get(j, k, i, l) + r.get(k, i, j, l);
                    prop_assert!(bianchi.abs() <= tol * scale, "Bianchi {bianchi}");
                }
            }
        }
    }
    prop_assert!(b.weyl_trace_residual() <= tol * scale);
    prop_assert!(b.ricci_contraction_residual() <= tol * scale);
    if let Some(s) = &b.split {
        let (sp, sm): (f64, f64) = (s.plus.iter().sum(), s.minus.iter().sum());
        prop_assert!(sp.abs() <= tol * scale && sm.abs() <= tol * scale);
        let split = b.norms.w_plus_sq + b.norms.w_minus_sq;
        prop_assert!((split - b.weyl_tensor_norm_sq()).abs() <= tol * scale * scale);
    }
    Ok(())
}

fn point() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-0.9f64..0.9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sphere_algebra(p in point(), r in 0.5f64..3.0) {
        check_algebra(&curvature(&round_sphere(4, r).unwrap(), &p).unwrap(), 1e-10)?;
    }

    #[test]
    fn product_algebra(p in point(), r1 in 0.5f64..2.0, r2 in 0.5f64..2.0) {
        check_algebra(&curvature(&s2xs2(r1, r2).unwrap(), &p).unwrap(), 1e-10)?;
    }

    #[test]
    fn fubini_study_algebra(p in point()) {
        let b = curvature(&cp2_fubini_study().unwrap(), &p).unwrap();
        check_algebra(&b, 1e-10)?;
        prop_assert!((b.norms.w_plus_sq - 24.0).abs() < 1e-8);
    }

    #[test]
    fn perturbed_sphere_algebra(p in point(), eps in -0.2f64..0.2) {
        let fx = build(&FixtureSpec::PerturbedSphere4 { eps }).unwrap();
        check_algebra(&curvature(&fx.chart, &p).unwrap(), 1e-9)?;
    }

    #[test]
    fn finite_difference_algebra(p in point(), a in -0.15f64..0.15, b in -0.15f64..0.15) {
        check_algebra(&curvature(&polynomial_chart(a, b), &p).unwrap(), 1e-9)?;
    }

    #[test]
    fn flip_swaps_halves(p in point(), eps in -0.2f64..0.2) {
        let fx = build(&FixtureSpec::PerturbedSphere4 { eps }).unwrap();
        let a = curvature(&fx.chart, &p).unwrap().split.unwrap();
        let b = curvature(&fx.chart.flipped(), &p).unwrap().split.unwrap();
        prop_assert_eq!(a.plus, b.minus);
        prop_assert_eq!(a.minus, b.plus);
    }

    #[test]
    fn oscillation_bounds_are_ordered(m in 1.05f64..200.0, gap in 0.1f64..5.0, d in 0.0f64..1.0) {
        let osc = osc_bound(QeOrder::Finite(m)).unwrap();
        prop_assert!(osc > 0.0 && osc < 5f64.ln());
        let input = BoundsInput {
            m: QeOrder::Finite(m),
            lambda: 1.0,
            ric_min: 1.0 - gap,
            ric_max: 1.0 + gap,
            diameter: d * std::f64::consts::PI * (m / gap).sqrt(),
            ..BoundsInput::default()
        };
        let mixed = mixed_osc_bound(&input).unwrap();
        prop_assert!(mixed.rhs >= 1.0);
        prop_assert!((mixed.osc_limit - m * mixed.rhs.ln()).abs() <= 1e-9 * mixed.osc_limit.max(1.0));
    }

    #[test]
    fn threshold_root_is_bracketed(m in 1.05f64..100.0, lambda in 0.5f64..3.0, lo in 0.0f64..0.95, hi in 0.05f64..3.0) {
        let (c, big_c) = (lambda * lo, lambda + hi);
        let input = BoundsInput { m: QeOrder::Finite(m), lambda, ric_min: c, ric_max: big_c, ..BoundsInput::default() };
        let t = ht_thresholds(&input).unwrap();
        let dm = d_m(QeOrder::Finite(m)).unwrap();
        prop_assert!(t.x0 > 0.0 && t.t3 == 2.0 * t.x0);
        prop_assert!(mixed_profile(m, lambda, c, big_c, 0.999 * t.x0) < dm);
        prop_assert!(mixed_profile(m, lambda, c, big_c, 1.001 * t.x0) > dm);
        // each half-profile alone reaches D_m later than the product
        prop_assert!(t.x0 <= t.t1 + 1e-9 && t.x0 <= t.t2 + 1e-9);
    }

    #[test]
    fn volume_bound_grows_with_oscillation(m in 1.5f64..20.0, lambda in 0.5f64..5.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let osc = osc_bound(QeOrder::Finite(m)).unwrap();
        let at = |f_osc: f64| volume_bound(&BoundsInput { m: QeOrder::Finite(m), lambda, f_osc, ..BoundsInput::default() }).unwrap();
        let (lo, hi) = (osc * a.min(b) * 0.99, osc * a.max(b) * 0.99);
        match (at(lo), at(hi)) {
            (VolumeBound::Max(x), VolumeBound::Max(y)) => prop_assert!(x <= y * (1.0 + 1e-12)),
            other => prop_assert!(false, "{other:?}"),
        }
        prop_assert_eq!(at(osc * 1.01), VolumeBound::Unconstrained);
    }

    #[test]
    fn solutions_stay_between_envelopes(
        m in 1.5f64..10.0,
        lambda in 0.5f64..3.0,
        lo in 0.0f64..1.0,
        hi in 0.0f64..1.0,
        len in 0.1f64..1.5,
    ) {
        let (c, big_c) = (lambda * lo * 0.9, lambda + hi);
        let p = synthetic_profile(SyntheticRic::Linear(big_c, c), len, 60).unwrap();
        let sol = integrate_u(&p, m, lambda, 1.0).unwrap();
        let pr = ComparisonParams { m, lambda, ric_min: c, ric_max: big_c };
        let cos = cosine_envelope_check(&p, &sol, &pr, DEFAULT_TOL).unwrap();
        prop_assert!(cos.passed() || cos.status == CheckStatus::Skipped);
        prop_assert!(cosh_envelope_check(&p, &sol, &pr, DEFAULT_TOL).unwrap().passed());
    }

    #[test]
    fn pairwise_sum_matches_naive_sum(values in prop::collection::vec(-1e3f64..1e3, 0..500)) {
        let naive: f64 = values.iter().sum();
        let s = pairwise_sum(&values);
        let scale: f64 = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!((s - naive).abs() <= 1e-12 * scale);
    }
}
