use std::f64::consts::PI;

use qem::bounds::*;

fn fin(m: f64) -> QeOrder {
    QeOrder::Finite(m)
}

fn input(m: f64, lambda: f64, c: f64, big_c: f64) -> BoundsInput {
    BoundsInput {
        m: fin(m),
        lambda,
        ric_min: c,
        ric_max: big_c,
        ..Default::default()
    }
}

fn sphere_data(m: f64) -> BoundsInput {
    BoundsInput {
        m: fin(m),
        lambda: 3.0,
        ric_min: 3.0,
        ric_max: 3.0,
        f_osc: 0.0,
        diameter: PI,
        vol: 8.0 * PI * PI / 3.0,
        w2_integral: 0.0,
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

// Reference values below were produced with 40-digit arithmetic (mpmath).
const T1_GOLDEN: f64 = 1.241_216_733_869_032;
const T2_GOLDEN: f64 = 1.440_373_477_750_990;
const X0_GOLDEN: f64 = 0.942_309_060_756_642_2;

#[test]
fn d_m_values() {
    assert!(close(d_m(fin(2.0)).unwrap(), 6f64.powf(0.25), 1e-15));
    assert!(close(d_m(fin(2.0)).unwrap(), 1.565_084_580_073_287, 1e-14));
    assert!(d_m(fin(1.0)).is_err());
    let m = 1e6;
    let expected = 1.0 + 5f64.ln() / m;
    assert!(((d_m(fin(m)).unwrap() - expected) / expected).abs() < 1e-9);
    assert_eq!(d_m(QeOrder::Soliton).unwrap(), 1.0);
    for m in [1.01, 1.5, 3.0, 40.0] {
        assert!(d_m(fin(m)).unwrap() > 1.0);
    }
}

#[test]
fn osc_bound_values() {
    assert!(close(osc_bound(fin(2.0)).unwrap(), 0.5 * 6f64.ln(), 1e-15));
    assert!(close(osc_bound(fin(3.0)).unwrap(), 1.107_496_014_298_998, 1e-14));
    assert!((osc_bound(fin(1e6)).unwrap() - 5f64.ln()).abs() < 1e-5);
    assert!(close(osc_bound(QeOrder::Soliton).unwrap(), 5f64.ln(), 1e-15));
    assert!(osc_bound(fin(0.5)).is_err());
}

#[test]
fn osc_bound_is_m_log_d_m() {
    for m in [1.1, 2.0, 5.0, 50.0] {
        let lhs = (m + 2.0) * d_m(fin(m)).unwrap().ln();
        let rhs = (m + 2.0) / m * osc_bound(fin(m)).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12, "m = {m}: {lhs} vs {rhs}");
    }
}

#[test]
fn cosine_diameter_bound() {
    let mut b = input(2.0, 1.0, 0.0, 2.0);
    assert_eq!(diam_lower_cos(&b).unwrap(), 0.0);
    b.f_osc = 2.0 * 2f64.ln();
    let v = diam_lower_cos(&b).unwrap();
    assert!(close(v, 2f64.sqrt() * PI / 3.0, 1e-14));
    assert!(close(v, 1.480_960_979_386_122, 1e-14));

    let s = BoundsInput {
        m: fin(1e6),
        f_osc: 5f64.ln(),
        ..input(1e6, 1.0, 0.0, 2.0)
    };
    let v = diam_lower_cos(&s).unwrap();
    assert!(((v - (2.0 * 5f64.ln()).sqrt()) / v).abs() < 1e-3);

    let bad = BoundsInput {
        f_osc: 0.3,
        ..input(2.0, 1.0, 1.5, 2.0)
    };
    assert!(diam_lower_cos(&bad).is_err());
}

#[test]
fn cosh_diameter_bound() {
    let mut b = input(2.0, 1.0, 0.0, 2.0);
    assert_eq!(diam_lower_cosh(&b).unwrap(), 0.0);
    b.f_osc = 2.0 * 2f64.ln();
    let v = diam_lower_cosh(&b).unwrap();
    assert!(close(v, 2f64.sqrt() * (2.0 + 3f64.sqrt()).ln(), 1e-14));
    assert!(close(v, 1.862_459_718_905_424, 1e-14));

    let s = BoundsInput {
        f_osc: 5f64.ln(),
        ..input(1e6, 1.0, 0.0, 2.0)
    };
    let v = diam_lower_cosh(&s).unwrap();
    assert!(((v - (2.0 * 5f64.ln()).sqrt()) / v).abs() < 1e-3);
}

#[test]
fn diameter_bounds_monotone_in_f_osc() {
    let mut prev = (-1.0, -1.0);
    for i in 0..50 {
        let b = BoundsInput {
            f_osc: 0.05 * i as f64,
            ..input(3.0, 1.0, 0.2, 2.5)
        };
        let cur = (diam_lower_cos(&b).unwrap(), diam_lower_cosh(&b).unwrap());
        assert!(cur.0 > prev.0 && cur.1 > prev.1);
        assert!(cur.0 < 0.5 * PI * (3.0f64 / 0.8).sqrt());
        prev = cur;
    }
}

#[test]
fn mixed_bound_values() {
    let mut b = input(2.0, 1.0, 0.0, 2.0);
    assert!(close(mixed_osc_bound(&b).unwrap().rhs, 1.0, 1e-15));
    b.diameter = 2.0;
    let v = mixed_osc_bound(&b).unwrap().rhs;
    let h = 0.5f64.sqrt();
    assert!(close(v, h.cosh() / h.cos(), 1e-13));
    assert!(close(v, 1.658_139_816_278_038, 1e-13));

    let limit = PI * 2f64.sqrt();
    b.diameter = 0.999 * limit;
    let near = mixed_osc_bound(&b).unwrap();
    assert!(near.rhs.is_finite() && near.rhs > 100.0);
    b.diameter = limit;
    assert!(mixed_osc_bound(&b).is_err());

    let mut prev = 0.0;
    for i in 0..40 {
        b.diameter = 0.0249 * i as f64 * limit;
        let r = mixed_osc_bound(&b).unwrap().rhs;
        assert!(r >= prev);
        prev = r;
    }
}

/// Secant iteration on `ln H(x) - ln D_m`, independent of the library's bisection.
fn secant_root(m: f64, lambda: f64, c: f64, big_c: f64) -> f64 {
    let dm = (5.0 + 8.0 / m - 12.0 / (m * m)).powf(1.0 / (m + 2.0));
    let g =
        |x: f64| (((big_c - lambda) / m).sqrt() * x).cosh().ln() - (((lambda - c) / m).sqrt() * x).cos().ln() - dm.ln();
    let (mut a, mut b) = (0.5, 1.0);
    for _ in 0..100 {
        let (ga, gb) = (g(a), g(b));
        if gb == ga {
            break;
        }
        let next = b - gb * (b - a) / (gb - ga);
        a = b;
        b = next;
    }
    b
}

#[test]
fn thresholds_golden() {
    let t = ht_thresholds(&input(2.0, 1.0, 0.0, 2.0)).unwrap();
    assert!((t.t1 - T1_GOLDEN).abs() < 1e-12);
    assert!((t.t2 - T2_GOLDEN).abs() < 1e-12);
    assert!((t.x0 - X0_GOLDEN).abs() < 1e-10);
    assert!((t.x0 - secant_root(2.0, 1.0, 0.0, 2.0)).abs() < 1e-10);
    assert!((t.t3 - 2.0 * t.x0).abs() == 0.0);
    let h = mixed_profile(2.0, 1.0, 0.0, 2.0, t.x0);
    assert!((h - d_m(fin(2.0)).unwrap()).abs() <= 1e-10);
    assert!(t.residual.abs() <= 1e-10);
}

#[test]
fn thresholds_positive_for_symmetric_data() {
    let t = ht_thresholds(&input(3.0, 1.0, 0.5, 1.5)).unwrap();
    assert!(t.t1 > 0.0 && t.t2 > 0.0 && t.t3 > 0.0);
}

#[test]
fn thresholds_compose_diameter_bounds() {
    for m in [1.5, 2.0, 7.0] {
        let base = input(m, 1.0, 0.3, 2.2);
        let t = ht_thresholds(&base).unwrap();
        let at = BoundsInput {
            f_osc: osc_bound(fin(m)).unwrap(),
            ..base
        };
        assert!((diam_lower_cos(&at).unwrap() - t.t1).abs() <= 1e-12);
        assert!((diam_lower_cosh(&at).unwrap() - t.t2).abs() <= 1e-12);
    }
}

#[test]
fn mixed_profile_increasing_on_search_interval() {
    let pole = 0.5 * PI * 2f64.sqrt();
    let mut prev = mixed_profile(2.0, 1.0, 0.0, 2.0, 0.0);
    for i in 1..2000 {
        let x = pole * 0.9999 * i as f64 / 2000.0;
        let v = mixed_profile(2.0, 1.0, 0.0, 2.0, x);
        assert!(v - prev >= 0.0);
        prev = v;
    }
}

#[test]
fn soliton_limits() {
    let l5 = 5f64.ln();
    let expect = [(2.0 * l5).sqrt(), (2.0 * l5).sqrt(), 2.0 * (2.0 * l5 / 2.0).sqrt()];
    for m in [QeOrder::Finite(1e6), QeOrder::Soliton] {
        let t = ht_thresholds(&BoundsInput {
            m,
            ..input(2.0, 1.0, 0.0, 2.0)
        })
        .unwrap();
        for (got, want) in [t.t1, t.t2, t.t3].iter().zip(expect) {
            assert!(((got - want) / want).abs() < 1e-3, "{got} vs {want}");
        }
    }
}

#[test]
fn thresholds_reject_bad_data() {
    assert!(ht_thresholds(&input(1.0, 1.0, 0.0, 2.0)).is_err());
    assert!(ht_thresholds(&input(2.0, 1.0, 1.0, 2.0)).is_err());
    assert!(ht_thresholds(&input(2.0, 1.0, 0.0, 0.5)).is_err());
}

#[test]
fn defect_bound_on_round_sphere() {
    for m in [1.5, 2.0, 5.0, 10.0, 100.0] {
        let d = ht_defect_lower(&sphere_data(m)).unwrap();
        assert!(((d.value - 16.0 * PI * PI) / (16.0 * PI * PI)).abs() < 1e-10);
        assert!(!d.below_threshold);
    }
    // hand chain at m = 2: 4*9/(6*1*5) * 8pi^2/3 * (5 + 4 - 3 - 1)
    let hand = 36.0 / 30.0 * 8.0 * PI * PI / 3.0 * 5.0;
    assert!((ht_defect_lower(&sphere_data(2.0)).unwrap().value - hand).abs() < 1e-10);
}

#[test]
fn defect_bound_at_and_beyond_oscillation_bound() {
    let mut b = sphere_data(2.0);
    b.w2_integral = 7.5;
    b.f_osc = osc_bound(fin(2.0)).unwrap();
    let d = ht_defect_lower(&b).unwrap();
    assert!(d.parenthesis.abs() < 1e-12);
    assert!((d.value - 7.5).abs() < 1e-10);
    b.f_osc *= 2.0;
    let d = ht_defect_lower(&b).unwrap();
    assert!(d.parenthesis < 0.0 && d.below_threshold);
    assert!(d.value < 7.5);
}

#[test]
fn defect_and_parenthesis_decrease_in_f_osc() {
    let mut prev = f64::INFINITY;
    for i in 0..30 {
        let mut b = sphere_data(3.0);
        b.f_osc = 0.1 * i as f64;
        let v = ht_defect_lower(&b).unwrap().value;
        assert!(v < prev);
        prev = v;
    }
}

#[test]
fn volume_bound_equality_case() {
    for m in [1.001, 1.5, 2.0, 3.0, 5.0, 10.0, 1e3, 1e6] {
        match volume_bound(&sphere_data(m)).unwrap() {
            VolumeBound::Max(v) => {
                assert!(((v - 8.0 * PI * PI / 3.0) / v).abs() < 1e-10, "m = {m}")
            }
            VolumeBound::Unconstrained => panic!("unexpected flag"),
        }
    }
    let b = BoundsInput {
        lambda: 1.0,
        ..sphere_data(10.0)
    };
    match volume_bound(&b).unwrap() {
        VolumeBound::Max(v) => assert!(((v - 24.0 * PI * PI) / v).abs() < 1e-12),
        VolumeBound::Unconstrained => panic!(),
    }
    let mut b = sphere_data(2.0);
    b.f_osc = osc_bound(fin(2.0)).unwrap() * 1.01;
    assert_eq!(volume_bound(&b).unwrap(), VolumeBound::Unconstrained);
}

#[test]
fn volume_parenthesis_collapses_at_zero_oscillation() {
    for m in [1.2, 2.0, 9.0, 77.0] {
        let p = volume_parenthesis(fin(m), 0.0).unwrap();
        let closed = 4.0 * (m - 1.0) * (m + 3.0) / (m * m);
        assert!((p - closed).abs() < 1e-12);
    }
}

#[test]
fn yamabe_bound_values() {
    for m in [1.5, 2.0, 5.0, 10.0, 1e4] {
        let y = yamabe_bound(&sphere_data(m)).unwrap();
        assert!(((y.value - 384.0 * PI * PI) / y.value).abs() < 1e-10);
        // Y(S^4) = n(n-1) Vol^(2/n) = 12 sqrt(8 pi^2/3)
        let y_sphere = 12.0 * (8.0 * PI * PI / 3.0f64).sqrt();
        assert!(((y.value - y_sphere * y_sphere) / y.value).abs() < 1e-10);
    }
    let mut b = sphere_data(2.0);
    b.f_osc = osc_bound(fin(2.0)).unwrap();
    assert!(yamabe_bound(&b).unwrap().value.abs() < 1e-10);
    let b = BoundsInput {
        m: fin(2.0),
        lambda: 1.0,
        vol: 1.0,
        f_osc: 0.0,
        ..Default::default()
    };
    assert!((yamabe_bound(&b).unwrap().value - 16.0).abs() < 1e-12);
}

#[test]
fn scalar_sq_criterion_both_directions() {
    let vol = 8.0 * PI * PI / 3.0;
    let v = scalar_sq_criterion(144.0 * vol, &sphere_data(2.0), 1e-12).unwrap();
    assert!(v.pass);
    assert!((v.threshold - 162.0 * vol).abs() < 1e-9);
    let inf = scalar_sq_criterion(
        144.0 * vol,
        &BoundsInput {
            m: QeOrder::Soliton,
            ..sphere_data(2.0)
        },
        1e-12,
    )
    .unwrap();
    assert!(inf.pass && (inf.threshold - 216.0 * vol).abs() < 1e-9);
    let big = scalar_sq_criterion(144.0 * vol, &sphere_data(1e6), 1e-12).unwrap();
    assert!((big.threshold - 216.0 * vol).abs() / (216.0 * vol) < 1e-5);
    let fail = scalar_sq_criterion(200.0 * vol, &sphere_data(2.0), 1e-12).unwrap();
    assert!(!fail.pass);
}

#[test]
fn parse_order() {
    assert_eq!(QeOrder::parse("inf").unwrap(), QeOrder::Soliton);
    assert_eq!(QeOrder::parse("2.5").unwrap(), QeOrder::Finite(2.5));
    assert!(QeOrder::parse("two").is_err());
}
