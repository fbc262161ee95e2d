use nalgebra::DMatrix;
use qem::fixtures::{build, cp2_fubini_study, round_sphere, s2xs2, torus4, FixtureSpec};
use qem::qe::*;
use qem::tensor::{curvature, Interval, MetricChart, Sampler};

const P: [f64; 4] = [0.3, -0.7, 0.4, 1.1];

fn flat_box() -> MetricChart {
    MetricChart::new("flat-box", vec![Interval::new(-1.0, 1.0); 4], |_| {
        DMatrix::identity(4, 4)
    })
    .unwrap()
}

fn sphere_qe(m: f64, lambda: f64) -> QEData {
    QEData::trivial(4, m, lambda).unwrap()
}

#[test]
fn einstein_sphere_has_zero_residual() {
    let chart = round_sphere(4, 1.0).unwrap();
    for m in [1.5, 2.0, 10.0] {
        let r = qe_residual(&chart, &sphere_qe(m, 3.0), &P).unwrap();
        assert!(r.norm <= 1e-7);
    }
}

#[test]
fn wrong_lambda_leaves_the_metric() {
    let chart = round_sphere(4, 1.0).unwrap();
    let r = qe_residual(&chart, &sphere_qe(2.0, 2.0), &P).unwrap();
    let g = chart.metric(&P);
    assert!((&r.tensor - &g).amax() < 1e-9);
    assert!((r.norm * r.norm - 4.0).abs() < 1e-6);
}

#[test]
fn flat_residual_matches_hand_hessian() {
    let chart = flat_box();
    let qe = QEData::new(4, 2.0, 0.0, |x| x[0].sin()).unwrap();
    let p = [0.0, 0.2, -0.3, 0.5];
    let r = qe_residual(&chart, &qe, &p).unwrap();
    // Hess f = -sin(x1) e11 = 0, df = cos(x1) e1 = e1
    let mut want = DMatrix::zeros(4, 4);
    want[(0, 0)] = -0.5;
    assert!((&r.tensor - &want).amax() < 1e-8, "{}", r.tensor);
    let q = [0.4, 0.0, 0.0, 0.0];
    let r = qe_residual(&chart, &qe, &q).unwrap();
    let hand = -0.4f64.sin() - 0.5 * 0.4f64.cos().powi(2);
    assert!((r.tensor[(0, 0)] - hand).abs() < 1e-8);
}

#[test]
fn scalar_identities_on_einstein_fixtures() {
    let cases = [
        (round_sphere(4, 1.0).unwrap(), 3.0),
        (s2xs2(1.0, 1.0).unwrap(), 1.0),
        (cp2_fubini_study().unwrap(), 6.0),
        (torus4(1.0).unwrap(), 0.0),
    ];
    for (chart, lambda) in cases {
        let pts = Sampler::Random { count: 10, seed: 3 }.points(&chart);
        for p in &pts {
            let l = scalar_identity_residuals(&chart, &sphere_qe(2.0, lambda), p).unwrap();
            assert!(l.max_abs() <= 1e-6, "{}: {l:?}", chart.label());
            let u = u_identity_residual(&chart, &sphere_qe(5.0, lambda), p).unwrap();
            assert!(u.abs() <= 1e-6);
        }
    }
}

#[test]
fn scalar_identities_hand_substitution_on_sphere() {
    // R = 12, |Ric|^2 = 36, m = 2, lambda = 3:
    // 0 - [0 - 36 - 144 + 288 - 108] = 0
    let closed = laplacian_r_closed_form(2.0, 3.0, 12.0, 36.0, 0.0);
    assert_eq!(closed, 0.0);
    let hand =
        -(2.0 * 1.0 / 2.0) * 36.0 - (2.0 / 2.0) * 144.0 + (2.0 * 8.0 / 2.0) * 3.1 * 12.0 - (24.0 / 2.0) * 3.1 * 3.1;
    let chart = round_sphere(4, 1.0).unwrap();
    let l = scalar_identity_residuals(&chart, &sphere_qe(2.0, 3.1), &P).unwrap();
    assert!((l.r3 + hand).abs() < 1e-5);
    assert!(l.r3.abs() >= 1.0);
    assert!((l.r1 + 0.4).abs() < 1e-9);
}

#[test]
fn scalar_identities_rejects_bad_inputs() {
    let chart = round_sphere(4, 1.0).unwrap();
    assert!(scalar_identity_residuals(&chart, &sphere_qe(1.0, 3.0), &P).is_err());
    let s3 = round_sphere(3, 1.0).unwrap();
    let q3 = QEData::trivial(3, 2.0, 2.0).unwrap();
    assert!(scalar_identity_residuals(&s3, &q3, &[0.1, 0.2, 0.3]).is_err());
    assert!(u_identity_residual(&s3, &q3, &[0.1, 0.2, 0.3]).unwrap().abs() < 1e-9);
    assert!(QEData::trivial(4, 0.0, 1.0).is_err());
}

#[test]
fn trace_shift_is_exactly_minus_n_epsilon() {
    let chart = build(&FixtureSpec::PerturbedSphere4 { eps: 0.05 }).unwrap().chart;
    let eps = 0.0123;
    let a = trace_residual(&chart, &sphere_qe(2.0, 3.0), &P).unwrap();
    let b = trace_residual(&chart, &sphere_qe(2.0, 3.0 + eps), &P).unwrap();
    assert!((b - a + 4.0 * eps).abs() < 1e-9);
}

#[test]
fn u_identity_on_flat_parabola() {
    let chart = flat_box();
    let qe = QEData::new(4, 1.0, 0.0, |x| x[0] * x[0]).unwrap();
    let r = u_identity_residual(&chart, &qe, &[0.0; 4]).unwrap();
    assert!((r + 2.0).abs() < 1e-6);
    let direct = laplacian_fd(&chart, |x| (-x[0] * x[0]).exp(), &[0.0; 4]).unwrap();
    assert!((direct + 2.0).abs() < 1e-6);
}

#[test]
fn u_identity_closed_form_on_sphere() {
    let chart = round_sphere(4, 1.0).unwrap();
    let r = u_identity_residual(&chart, &sphere_qe(3.0, 2.9), &P).unwrap();
    assert!((r + 0.4 / 3.0).abs() < 1e-6);
    let r = u_identity_residual(&chart, &sphere_qe(3.0, 3.0 + 0.1), &P).unwrap();
    assert!(r.abs() >= 0.1);
}

#[test]
fn u_identity_is_proportional_to_trace_residual() {
    let chart = build(&FixtureSpec::PerturbedSphere4 { eps: 0.1 }).unwrap().chart;
    let m = 3.0;
    let qe = QEData::new(4, m, 2.7, |x| 0.3 * x[0] - 0.2 * x[1] * x[2]).unwrap();
    for p in (Sampler::Random { count: 10, seed: 9 }).points(&chart) {
        let r1 = trace_residual(&chart, &qe, &p).unwrap();
        let u = u_identity_residual(&chart, &qe, &p).unwrap();
        let factor = -(-qe.value(&p) / m).exp() / m;
        assert!((u - factor * r1).abs() < 1e-8, "{u} vs {}", factor * r1);
    }
}

#[test]
fn gradient_pairing_two_ways() {
    let chart = build(&FixtureSpec::PerturbedSphere4 { eps: 0.1 }).unwrap().chart;
    let f = |x: &[f64]| x[0] * x[1] + 0.5 * x[3];
    let p = P;
    let b = curvature(&chart, &p).unwrap();
    let dr = scalar_gradient(&chart, &p).unwrap();
    let df = [p[1], p[0], 0.0, 0.5];
    let analytic: f64 = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| b.metric_inv[(i, j)] * dr[i] * df[j])
        .sum();
    let h = 1e-4;
    let fd_df: Vec<f64> = (0..4)
        .map(|k| {
            let (mut a, mut c) = (p, p);
            a[k] += h;
            c[k] -= h;
            (f(&a) - f(&c)) / (2.0 * h)
        })
        .collect();
    let both: f64 = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| b.metric_inv[(i, j)] * dr[i] * fd_df[j])
        .sum();
    assert!((analytic - both).abs() < 1e-6 * analytic.abs().max(1.0));
}

#[test]
fn scalar_bound_examples() {
    let chart = round_sphere(4, 1.0).unwrap();
    let s = Sampler::Random { count: 20, seed: 1 };
    let r = scalar_bound_check(&chart, &sphere_qe(2.0, 3.0), &s).unwrap();
    assert!(r.pass && (r.min_scalar - 12.0).abs() < 1e-9 && (r.threshold - 7.2).abs() < 1e-12);
    let r = scalar_bound_check(&chart, &sphere_qe(1.0 + 1e-9, 3.0), &s).unwrap();
    assert!(r.pass && (r.threshold - 9.0).abs() < 1e-8);
    let flat = torus4(1.0).unwrap();
    let r = scalar_bound_check(&flat, &sphere_qe(2.0, 1.0), &s).unwrap();
    assert!(!r.pass && r.min_scalar == 0.0);
}

#[test]
fn perturbation_residual_is_linear() {
    let at = |eps: f64| {
        let f = build(&FixtureSpec::PerturbedSphere4 { eps }).unwrap();
        assert_eq!(f.expected_fail, eps != 0.0);
        qe_residual(&f.chart, f.qe.as_ref().unwrap(), &P).unwrap().norm
    };
    let (a, b) = (at(0.01), at(0.02));
    assert!(a > 1e-4);
    let slope_ratio = b / a;
    assert!((slope_ratio - 2.0).abs() < 0.2, "ratio {slope_ratio}");
    assert!(at(0.0) < 1e-7);
}

#[test]
fn summary_and_csv() {
    let chart = round_sphere(4, 1.0).unwrap();
    let pts = Sampler::Random { count: 5, seed: 2 }.points(&chart);
    let s = residual_summary(&chart, &sphere_qe(2.0, 3.0), &pts).unwrap();
    assert_eq!(s.points, 5);
    assert!(s.qe_norm.max < 1e-7 && s.r3.unwrap().max < 1e-6);
    assert!(residual_summary(&chart, &sphere_qe(2.0, 3.0), &[]).is_err());
    let mut buf = Vec::new();
    write_residual_csv(&chart, &sphere_qe(2.0, 3.0), &pts, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 6);
}
