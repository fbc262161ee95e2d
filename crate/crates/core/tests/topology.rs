use std::f64::consts::PI;

use qem::bounds::QeOrder;
use qem::fixtures::{build, cp2_fubini_study, round_sphere, s2xs2, torus4, FixtureSpec};
use qem::qe::QEData;
use qem::topology::*;

const PI2: f64 = PI * PI;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Exact integrals of a constant-curvature Einstein metric with `f = 0`.
fn einstein_integrals(vol: f64, scalar: f64, w_plus_sq: f64, w_minus_sq: f64) -> CurvatureIntegrals {
    CurvatureIntegrals {
        vol,
        w_plus_sq: w_plus_sq * vol,
        w_minus_sq: w_minus_sq * vol,
        scalar_sq: scalar * scalar * vol,
        traceless_ricci_sq: 0.0,
        scalar: scalar * vol,
        grad_r_dot_grad_f: 0.0,
        scalar_grad_f_sq: 0.0,
        grad_f_sq: 0.0,
        f_range: Some((0.0, 0.0)),
        min_scalar: scalar,
        max_qe_residual: Some(0.0),
        nodes: 0,
    }
}

#[test]
fn volumes_and_total_scalar_curvature() {
    let q = QuadratureSpec::gauss(24);
    let vol = integrate(&round_sphere(4, 1.0).unwrap(), |_| 1.0, &q).unwrap();
    assert!(rel(vol, 8.0 * PI2 / 3.0) < 1e-4, "vol {vol}");

    let side = 2.0 * PI;
    let vol = integrate(&torus4(side).unwrap(), |_| 1.0, &QuadratureSpec::gauss(8)).unwrap();
    assert!(rel(vol, side.powi(4)) < 1e-12);

    let i = curvature_integrals(&s2xs2(1.0, 1.0).unwrap(), None, &QuadratureSpec::gauss(24)).unwrap();
    assert!(rel(i.scalar, 64.0 * PI2) < 1e-4, "int R {}", i.scalar);
}

#[test]
fn flat_torus_integrals_vanish() {
    let r = topology_report(&torus4(1.0).unwrap(), None, &QuadratureSpec::gauss(16)).unwrap();
    assert!(r.chi_hat.abs() < 1e-9 && r.tau_hat.abs() < 1e-9);
    assert_eq!((r.ht_plus, r.ht_minus), (0.0, 0.0));
    let ht = ht_from(&r.integrals, 1e-9);
    assert!(ht.pass);
}

#[test]
fn product_of_spheres_topology() {
    let r = topology_report(&s2xs2(1.0, 1.0).unwrap(), None, &QuadratureSpec::gauss(24)).unwrap();
    assert!((r.chi_hat - 4.0).abs() < 1e-3, "chi {}", r.chi_hat);
    assert!(r.tau_hat.abs() < 1e-6, "tau {}", r.tau_hat);
    assert!(r.routes_agree());
    assert!(r.chi_tolerance < 1e-2);
    // |W+|^2 = |W-|^2 = 2/3 pointwise
    assert!(rel(r.integrals.w_plus_sq, 32.0 * PI2 / 3.0) < 1e-3);
    assert!(rel(r.integrals.w_minus_sq, r.integrals.w_plus_sq) < 1e-9);
}

#[test]
fn sphere_has_no_weyl_and_no_signature() {
    let i = curvature_integrals(&round_sphere(4, 1.0).unwrap(), None, &QuadratureSpec::gauss(16)).unwrap();
    assert!(i.w_sq() < 1e-9);
    assert!(i.tau_hat().abs() < 1e-9);
    assert!((i.min_scalar - 12.0).abs() < 1e-9);
}

#[test]
fn orientation_flip_negates_signature() {
    let chart = cp2_fubini_study().unwrap();
    let q = QuadratureSpec::gauss(12);
    let a = curvature_integrals(&chart, None, &q).unwrap();
    let b = curvature_integrals(&chart.flipped(), None, &q).unwrap();
    assert_eq!(a.w_plus_sq, b.w_minus_sq);
    assert_eq!(a.w_minus_sq, b.w_plus_sq);
    assert_eq!(a.tau_hat(), -b.tau_hat());
    assert_eq!(a.chi_hat(), b.chi_hat());
    assert!(a.tau_hat() > 0.5);
}

#[test]
fn route_consistency_is_algebraic() {
    let i = curvature_integrals(&cp2_fubini_study().unwrap(), None, &QuadratureSpec::gauss(10)).unwrap();
    let r = TopologyReport::from_integrals(i, None, 10, 10);
    assert!(r.routes_agree(), "gap {}", r.route_gap);
    assert!(r.chi_tolerance.is_nan());
}

#[test]
fn closed_form_euler_identities_on_the_sphere() {
    // vol 8 pi^2/3, R = 12: both sides equal 16 pi^2 for every m
    let i = einstein_integrals(8.0 * PI2 / 3.0, 12.0, 0.0, 0.0);
    for m in [1.5, 2.0, 5.0, 10.0] {
        let qe = QEData::trivial(4, m, 3.0).unwrap();
        let l = euler_identities_from(&i, &qe).unwrap();
        assert!(rel(l.lhs, 16.0 * PI2) < 1e-12);
        assert!(rel(l.rhs_scal, 16.0 * PI2) < 1e-12, "m {m}: {}", l.rhs_scal);
        assert!(rel(l.rhs_grad, 16.0 * PI2) < 1e-12);
    }
    let qe = QEData::trivial(4, 1.0, 3.0).unwrap();
    assert!(euler_identities_from(&i, &qe).is_err());
}

#[test]
fn euler_identity_terms_by_hand() {
    let t = EulerTerms {
        w_sq: 1.0,
        grad_f_sq: 2.0,
        scalar_grad_f_sq: 3.0,
        scalar_sq: 4.0,
        grad_r_dot_grad_f: 5.0,
        vol: 6.0,
    };
    let (m, l): (f64, f64) = (3.0, 0.5);
    let scal = 1.0 + (m - 2.0) * l / (2.0 * m * (m - 1.0)) * 2.0 + (m + 2.0) / (4.0 * m * (m - 1.0)) * 3.0
        - (m + 2.0) / (12.0 * (m - 1.0)) * 4.0
        + 2.0 * (m + 1.0) / (m - 1.0) * l * l * 6.0;
    let got = euler_scal_rhs(m, l, &t).unwrap();
    assert!((got - scal).abs() < 1e-12, "{got} vs {scal}");
    assert!(euler_grad_rhs(m, l, &t).unwrap().is_finite());
    assert!(euler_scal_rhs(0.5, l, &t).is_err());
}

#[test]
fn euler_identities_gate_non_quasi_einstein_input() {
    let f = build(&FixtureSpec::PerturbedSphere4 { eps: 0.1 }).unwrap();
    let r = euler_identity_check(&f.chart, f.qe.as_ref().unwrap(), &QuadratureSpec::gauss(8));
    assert!(r.is_err());
}

#[test]
fn gursky_inequalities() {
    let sphere = einstein_integrals(8.0 * PI2 / 3.0, 12.0, 0.0, 0.0);
    let g = gursky_from(&sphere, 1e-9).unwrap();
    assert!(g.first_holds && g.second_holds);
    assert!(g.lower.abs() < 1e-9 && g.w_plus_sq == 0.0);

    // S^2 x S^2: 16 pi^2 on the left, 32 pi^2/3 on the right
    let prod = einstein_integrals(16.0 * PI2, 4.0, 2.0 / 3.0, 2.0 / 3.0);
    let g = gursky_from(&prod, 1e-9).unwrap();
    assert!(rel(g.lower, 16.0 * PI2) < 1e-12);
    assert!(rel(g.w_plus_sq, 32.0 * PI2 / 3.0) < 1e-12);
    assert!(!g.first_holds);
    assert!(g.second_holds);

    let flat = curvature_integrals(&torus4(1.0).unwrap(), None, &QuadratureSpec::gauss(8)).unwrap();
    assert!(gursky_from(&flat, 1e-9).is_err());
}

#[test]
fn yamabe_identity_on_exact_integrals() {
    let y = yamabe_from(&einstein_integrals(8.0 * PI2 / 3.0, 12.0, 0.0, 0.0), 1e-12);
    assert!(y.pass && rel(y.value, 384.0 * PI2) < 1e-12);
    let y = yamabe_from(&einstein_integrals(16.0 * PI2, 4.0, 2.0 / 3.0, 2.0 / 3.0), 1e-12);
    assert!(y.pass && rel(y.value, 256.0 * PI2) < 1e-12);
    assert!(rel(y.identity_lhs, 32.0 * PI2 / 3.0) < 1e-12);
    let flat = yamabe_integral_check(&torus4(1.0).unwrap(), &QuadratureSpec::gauss(8), 1e-9).unwrap();
    assert!(flat.pass && flat.value == 0.0);
}

#[test]
fn yamabe_identity_on_quadrature() {
    let y = yamabe_integral_check(&s2xs2(1.0, 2.0).unwrap(), &QuadratureSpec::gauss(16), 1e-3).unwrap();
    assert!(y.pass, "{y:?}");
}

#[test]
fn constant_potential_satisfies_oscillation_estimate() {
    let chart = round_sphere(4, 1.0).unwrap();
    let qe = QEData::trivial(4, 2.0, 3.0).unwrap();
    let c = oscf_integral_check(&chart, &qe, &QuadratureSpec::gauss(8), 1e-9).unwrap();
    assert!(c.pass);
    assert_eq!((c.lhs, c.rhs, c.f_osc), (0.0, 0.0, 0.0));

    // by hand: m = 2, lambda = 1, vol = 1, f_osc = ln 2 -> (8/20) (2^2 - 1) = 1.2
    let mut i = einstein_integrals(1.0, 4.0, 0.0, 0.0);
    i.f_range = Some((0.0, 2f64.ln()));
    i.grad_r_dot_grad_f = 1.1;
    let qe = QEData::trivial(4, 2.0, 1.0).unwrap();
    let c = oscf_from(&i, &qe, 0.0).unwrap();
    assert!((c.rhs - 1.2).abs() < 1e-12 && c.pass);
    i.grad_r_dot_grad_f = 1.3;
    assert!(!oscf_from(&i, &qe, 0.0).unwrap().pass);
}

#[test]
fn scalar_criterion_from_integrals() {
    // unit sphere with lambda = 3: int R^2 = 384 pi^2 = 144 vol
    let i = einstein_integrals(8.0 * PI2 / 3.0, 12.0, 0.0, 0.0);
    let v = scalar_sq_from(&i, QeOrder::Finite(2.0), 3.0, 1e-9).unwrap();
    // threshold 24 (3/4) 9 vol = 162 vol
    assert!(v.pass && rel(v.threshold, 162.0 * 8.0 * PI2 / 3.0) < 1e-12);
    // lambda = 2.5 gives 112.5 vol < 144 vol
    let low = scalar_sq_from(&i, QeOrder::Finite(2.0), 2.5, 1e-9).unwrap();
    assert!(!low.pass);
}

#[test]
fn halving_resolution_changes_little() {
    let chart = s2xs2(1.0, 1.0).unwrap();
    let r = topology_report(&chart, None, &QuadratureSpec::gauss(16)).unwrap();
    assert_eq!(r.coarse_nodes_per_axis, 8);
    assert!(r.chi_tolerance < 0.1, "{}", r.chi_tolerance);
}

#[test]
fn quadrature_spec_validation() {
    assert!(QuadratureSpec::gauss(4).validate().is_err());
    assert!(integrate(&torus4(1.0).unwrap(), |_| 1.0, &QuadratureSpec::gauss(4)).is_err());
    let bad = QuadratureSpec {
        compactification: Compactification::Tangent { scale: 0.0 },
        ..QuadratureSpec::gauss(8)
    };
    assert!(bad.validate().is_err());
}

#[test]
fn truncated_run_underestimates_volume() {
    let chart = round_sphere(4, 1.0).unwrap();
    let q = QuadratureSpec {
        compactification: Compactification::Truncate { cutoff: 3.0 },
        ..QuadratureSpec::gauss(16)
    };
    let vol = integrate(&chart, |_| 1.0, &q).unwrap();
    assert!(vol < 8.0 * PI2 / 3.0 && vol > 0.5 * 8.0 * PI2 / 3.0);
}

#[test]
fn integrand_csv_has_one_row_per_node() {
    let mut buf = Vec::new();
    write_integrand_csv(&torus4(1.0).unwrap(), &QuadratureSpec::gauss(8), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 8usize.pow(4) + 1);
    assert!(text.starts_with("x1,x2,x3,x4,dv,R,"));
}
