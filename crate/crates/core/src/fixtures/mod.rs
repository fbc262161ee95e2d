//! Analytic test manifolds with known invariants, and imported profiles.

pub mod profile;
pub mod spline;

use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::qe::QEData;
use crate::tensor::{conformal_jet, product_jet, Interval, MetricChart, MetricJet};

pub use profile::{
    cohomogeneity_one_metric, load_profile, read_profile, write_profile, ImportedProfile, OscComparison,
};
pub use spline::CubicSpline;

/// Order `m` attached to the trivial structures of Einstein fixtures unless overridden.
pub const DEFAULT_M: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub enum FixtureSpec {
    Sphere4 {
        r: f64,
    },
    Torus4 {
        side: f64,
    },
    S2xS2 {
        r1: f64,
        r2: f64,
    },
    Cp2FubiniStudy,
    /// Round unit sphere conformally deformed by `exp(2 eps Y)`, `Y` a
    /// second-order spherical harmonic, paired with the structure of the
    /// undeformed sphere.
    PerturbedSphere4 {
        eps: f64,
    },
    ImportedProfile {
        path: PathBuf,
    },
}

impl FixtureSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            FixtureSpec::Sphere4 { .. } => "sphere4",
            FixtureSpec::Torus4 { .. } => "torus4",
            FixtureSpec::S2xS2 { .. } => "s2xs2",
            FixtureSpec::Cp2FubiniStudy => "cp2-fubini-study",
            FixtureSpec::PerturbedSphere4 { .. } => "perturbed-sphere4",
            FixtureSpec::ImportedProfile { .. } => "imported-profile",
        }
    }

    pub const KINDS: [&'static str; 6] = [
        "sphere4",
        "torus4",
        "s2xs2",
        "cp2-fubini-study",
        "perturbed-sphere4",
        "imported-profile",
    ];
}

/// Known invariants of a fixture; `None` where no closed form is available.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Expected {
    pub chi: Option<f64>,
    pub tau: Option<f64>,
    pub vol: Option<f64>,
    pub scalar: Option<f64>,
    pub ricci_min: Option<f64>,
    pub ricci_max: Option<f64>,
    pub diameter: Option<f64>,
    /// Einstein constant of the trivial structure, when the metric is Einstein.
    pub lambda: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub spec: FixtureSpec,
    pub chart: MetricChart,
    pub qe: Option<QEData>,
    pub expected: Expected,
    /// Default Gauss-Legendre nodes per axis for curvature integrals.
    pub default_nodes: usize,
    /// Whether the attached structure is expected to fail the residual checks.
    pub expected_fail: bool,
    pub profile: Option<ImportedProfile>,
}

impl Fixture {
    /// Replace `m` of the attached structure.
    pub fn with_m(mut self, m: f64) -> Result<Self> {
        if let Some(q) = self.qe.take() {
            self.qe = Some(q.with_m(m)?);
        }
        Ok(self)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} must be a positive number, got {v}"
        )));
    }
    Ok(())
}

/// Stereographic chart of the round `n`-sphere of radius `r`:
/// `g = 4 r^2 / (1 + |x|^2)^2 delta`.
pub fn round_sphere(n: usize, r: f64) -> Result<MetricChart> {
    positive("radius", r)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {n}")));
    }
    MetricChart::new(format!("sphere{n}"), vec![Interval::unbounded(); n], move |p| {
        let s: f64 = p.iter().map(|x| x * x).sum();
        DMatrix::identity(n, n) * (4.0 * r * r / ((1.0 + s) * (1.0 + s)))
    })
    .map(|c| c.with_jet(move |p| stereographic_jet(p, r)))
}

/// `phi = ln(2r) - ln(1 + |x|^2)` with gradient and Hessian.
fn stereographic_phi(p: &[f64], r: f64) -> (f64, Vec<f64>, DMatrix<f64>) {
    let n = p.len();
    let q = 1.0 + p.iter().map(|x| x * x).sum::<f64>();
    let phi = (2.0 * r).ln() - q.ln();
    let dphi = p.iter().map(|x| -2.0 * x / q).collect();
    let d2 = DMatrix::from_fn(n, n, |k, l| {
        let delta = if k == l { 1.0 } else { 0.0 };
        -2.0 * delta / q + 4.0 * p[k] * p[l] / (q * q)
    });
    (phi, dphi, d2)
}

fn stereographic_jet(p: &[f64], r: f64) -> MetricJet {
    let (phi, dphi, d2) = stereographic_phi(p, r);
    conformal_jet(phi, &dphi, &d2)
}

/// `Y = 4 x1 x2 / (1 + |x|^2)^2`, the product of two ambient coordinate
/// functions restricted to the unit sphere.
fn harmonic_y(p: &[f64]) -> (f64, Vec<f64>, DMatrix<f64>) {
    let n = p.len();
    let q = 1.0 + p.iter().map(|x| x * x).sum::<f64>();
    let a = p[0] * p[1];
    let da: Vec<f64> = (0..n)
        .map(|k| match k {
            0 => p[1],
            1 => p[0],
            _ => 0.0,
        })
        .collect();
    let b = q.powi(-2);
    let db: Vec<f64> = p.iter().map(|x| -4.0 * x * q.powi(-3)).collect();
    let y = 4.0 * a * b;
    let dy = (0..n).map(|k| 4.0 * (da[k] * b + a * db[k])).collect();
    let d2 = DMatrix::from_fn(n, n, |k, l| {
        let d2a = if (k, l) == (0, 1) || (k, l) == (1, 0) { 1.0 } else { 0.0 };
        let delta = if k == l { 1.0 } else { 0.0 };
        let d2b = -4.0 * delta * q.powi(-3) + 24.0 * p[k] * p[l] * q.powi(-4);
        4.0 * (d2a * b + da[k] * db[l] + da[l] * db[k] + a * d2b)
    });
    (y, dy, d2)
}

fn perturbed_sphere(eps: f64) -> Result<MetricChart> {
    if !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("eps must be finite, got {eps}")));
    }
    let phi = move |p: &[f64]| {
        let (p0, d0, h0) = stereographic_phi(p, 1.0);
        let (y, dy, hy) = harmonic_y(p);
        let d: Vec<f64> = d0.iter().zip(&dy).map(|(a, b)| a + eps * b).collect();
        (p0 + eps * y, d, h0 + hy * eps)
    };
    MetricChart::new("perturbed-sphere4", vec![Interval::unbounded(); 4], move |p| {
        let (v, _, _) = phi(p);
        DMatrix::identity(4, 4) * (2.0 * v).exp()
    })
    .map(|c| {
        c.with_jet(move |p| {
            let (v, d, h) = phi(p);
            conformal_jet(v, &d, &h)
        })
    })
}

/// Product of two stereographic round two-spheres of radii `r1`, `r2`.
pub fn s2xs2(r1: f64, r2: f64) -> Result<MetricChart> {
    positive("r1", r1)?;
    positive("r2", r2)?;
    let factor = |x: f64, y: f64, r: f64| 4.0 * r * r / ((1.0 + x * x + y * y).powi(2));
    MetricChart::new("s2xs2", vec![Interval::unbounded(); 4], move |p| {
        let (a, b) = (factor(p[0], p[1], r1), factor(p[2], p[3], r2));
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a, a, b, b]))
    })
    .map(|c| c.with_jet(move |p| product_jet(&stereographic_jet(&p[..2], r1), &stereographic_jet(&p[2..], r2))))
}

pub fn torus4(side: f64) -> Result<MetricChart> {
    positive("side", side)?;
    MetricChart::new("torus4", vec![Interval::new(0.0, side); 4], |_| DMatrix::identity(4, 4)).map(|c| {
        c.with_jet(|_| MetricJet {
            g: DMatrix::identity(4, 4),
            dg: vec![DMatrix::zeros(4, 4); 4],
            d2g: vec![DMatrix::zeros(4, 4); 16],
        })
    })
}

/// Fubini-Study metric on the affine chart `C^2` of `CP^2`, real coordinates
/// ordered `(x1, y1, x2, y2)` with `z_j = x_j + i y_j`, normalized so that
/// `Ric = 6 g`. Derivatives are taken numerically.
pub fn cp2_fubini_study() -> Result<MetricChart> {
    MetricChart::new("cp2-fubini-study", vec![Interval::unbounded(); 4], |p| {
        cp2_jet_parts(p, false).0
    })
    .map(|c| {
        c.with_jet(|p| {
            let (g, dg, d2g) = cp2_jet_parts(p, true);
            MetricJet { g, dg, d2g }
        })
    })
}

/// `dz_j/dx_a` for real coordinates `(x1, y1, x2, y2)`.
fn cp2_basis() -> [[Complex<f64>; 2]; 4] {
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let i = Complex::new(0.0, 1.0);
    [[one, zero], [i, zero], [zero, one], [zero, i]]
}

/// Fubini-Study metric `g_ab = Re sum h_jk u_aj conj(u_bk)` with
/// `h_jk = N_jk/q^2`, `N_jk = q delta_jk - conj(z_j) z_k`, `q = 1 + |z|^2`,
/// and optionally its first and second coordinate derivatives. `N` is
/// expanded so that no entry is a difference of large terms.
fn cp2_jet_parts(p: &[f64], derivs: bool) -> (DMatrix<f64>, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
    type C = Complex<f64>;
    let u = cp2_basis();
    let z = [C::new(p[0], p[1]), C::new(p[2], p[3])];
    let q = 1.0 + z[0].norm_sqr() + z[1].norm_sqr();
    let (q2, q3, q4) = (q * q, q * q * q, q * q * q * q);
    let re = |h: &[[C; 2]; 2]| {
        DMatrix::from_fn(4, 4, |a, b| {
            let mut acc = 0.0;
            for j in 0..2 {
                for k in 0..2 {
                    acc += (h[j][k] * u[a][j] * u[b][k].conj()).re;
                }
            }
            acc
        })
    };
    let delta = |j: usize, k: usize| if j == k { 1.0 } else { 0.0 };
    let big_n = [
        [C::new(1.0 + z[1].norm_sqr(), 0.0), -z[0].conj() * z[1]],
        [-z[1].conj() * z[0], C::new(1.0 + z[0].norm_sqr(), 0.0)],
    ];
    let h = big_n.map(|row| row.map(|v| v / q2));
    let g = re(&h);
    if !derivs {
        return (g, Vec::new(), Vec::new());
    }
    // dq/dx_c = 2 Re(conj(z) . u_c), d2q/dx_c dx_d = 2 delta_cd
    let qc: Vec<f64> = (0..4)
        .map(|c| 2.0 * (z[0].conj() * u[c][0] + z[1].conj() * u[c][1]).re)
        .collect();
    let nc = |c: usize, j: usize, k: usize| delta(j, k) * qc[c] - (u[c][j].conj() * z[k] + z[j].conj() * u[c][k]);
    let dg = (0..4)
        .map(|c| {
            let mut hc = [[C::new(0.0, 0.0); 2]; 2];
            for j in 0..2 {
                for k in 0..2 {
                    hc[j][k] = nc(c, j, k) / q2 - big_n[j][k] * (2.0 * qc[c] / q3);
                }
            }
            re(&hc)
        })
        .collect();
    let mut d2g = Vec::with_capacity(16);
    for c in 0..4 {
        for d in 0..4 {
            let qcd = 2.0 * delta(c, d);
            let mut hcd = [[C::new(0.0, 0.0); 2]; 2];
            for j in 0..2 {
                for k in 0..2 {
                    let ncd = delta(j, k) * qcd - (u[c][j].conj() * u[d][k] + u[d][j].conj() * u[c][k]);
                    hcd[j][k] = ncd / q2 - (nc(c, j, k) * qc[d] + nc(d, j, k) * qc[c]) * (2.0 / q3)
                        + big_n[j][k] * (6.0 * qc[c] * qc[d] / q4 - 2.0 * qcd / q3);
                }
            }
            d2g.push(re(&hcd));
        }
    }
    (g, dg, d2g)
}

/// Build a fixture; Einstein fixtures carry the trivial structure with `m = DEFAULT_M`.
pub fn build(spec: &FixtureSpec) -> Result<Fixture> {
    let mut expected_fail = false;
    let mut profile = None;
    let (chart, qe, expected, default_nodes) = match spec {
        FixtureSpec::Sphere4 { r } => {
            let chart = round_sphere(4, *r)?;
            let lambda = 3.0 / (r * r);
            let expected = Expected {
                chi: Some(2.0),
                tau: Some(0.0),
                vol: Some(8.0 * PI * PI / 3.0 * r.powi(4)),
                scalar: Some(12.0 / (r * r)),
                ricci_min: Some(lambda),
                ricci_max: Some(lambda),
                diameter: Some(PI * r),
                lambda: Some(lambda),
                notes: vec!["round metric in stereographic coordinates; Ric = (3/r^2) g".into()],
            };
            (chart, Some(QEData::trivial(4, DEFAULT_M, lambda)?), expected, 48)
        }
        FixtureSpec::Torus4 { side } => {
            let chart = torus4(*side)?;
            let expected = Expected {
                chi: Some(0.0),
                tau: Some(0.0),
                vol: Some(side.powi(4)),
                scalar: Some(0.0),
                ricci_min: Some(0.0),
                ricci_max: Some(0.0),
                diameter: Some(*side),
                lambda: Some(0.0),
                notes: vec!["flat; lambda = 0, so not a compact quasi-Einstein example with lambda > 0".into()],
            };
            (chart, Some(QEData::trivial(4, DEFAULT_M, 0.0)?), expected, 16)
        }
        FixtureSpec::S2xS2 { r1, r2 } => {
            let chart = s2xs2(*r1, *r2)?;
            let (k1, k2) = (1.0 / (r1 * r1), 1.0 / (r2 * r2));
            let einstein = (k1 - k2).abs() <= 1e-14 * k1.max(k2);
            let mut notes = vec!["product of round spheres; Ricci eigenvalues 1/r1^2, 1/r2^2".to_string()];
            if !einstein {
                notes.push("not Einstein; no structure attached".into());
            }
            let expected = Expected {
                chi: Some(4.0),
                tau: Some(0.0),
                vol: Some(16.0 * PI * PI * r1 * r1 * r2 * r2),
                scalar: Some(2.0 * (k1 + k2)),
                ricci_min: Some(k1.min(k2)),
                ricci_max: Some(k1.max(k2)),
                diameter: Some(PI * (r1 * r1 + r2 * r2).sqrt()),
                lambda: einstein.then_some(k1),
                notes,
            };
            let qe = if einstein {
                Some(QEData::trivial(4, DEFAULT_M, k1)?)
            } else {
                None
            };
            (chart, qe, expected, 24)
        }
        FixtureSpec::Cp2FubiniStudy => {
            let expected = Expected {
                chi: Some(3.0),
                tau: Some(1.0),
                vol: Some(PI * PI / 2.0),
                scalar: Some(24.0),
                ricci_min: Some(6.0),
                ricci_max: Some(6.0),
                diameter: Some(PI / 2.0),
                lambda: Some(6.0),
                notes: vec!["Fubini-Study, Ric = 6 g, complex orientation".into()],
            };
            (
                cp2_fubini_study()?,
                Some(QEData::trivial(4, DEFAULT_M, 6.0)?),
                expected,
                48,
            )
        }
        FixtureSpec::PerturbedSphere4 { eps } => {
            expected_fail = *eps != 0.0;
            let expected = Expected {
                chi: Some(2.0),
                tau: Some(0.0),
                lambda: Some(3.0),
                notes: vec![
                    "conformal deformation of the unit sphere; the attached structure (f = 0, lambda = 3) fails at first order in eps".into(),
                ],
                ..Default::default()
            };
            (
                perturbed_sphere(*eps)?,
                Some(QEData::trivial(4, DEFAULT_M, 3.0)?),
                expected,
                48,
            )
        }
        FixtureSpec::ImportedProfile { path } => {
            let p = load_profile(path)?;
            let chart = p.chart()?;
            let qe = match (p.m, p.lambda) {
                (Some(_), Some(_)) => Some(p.qe_data(None, None)?),
                _ => None,
            };
            let mut notes = vec!["diameter is the length of the t interval (a proxy)".to_string()];
            if let Some(pr) = &p.provenance {
                notes.push(format!("provenance: {pr}"));
            }
            let expected = Expected {
                diameter: Some(p.diameter_proxy()),
                lambda: p.lambda,
                notes,
                ..Default::default()
            };
            profile = Some(p);
            (chart, qe, expected, 24)
        }
    };
    Ok(Fixture {
        spec: spec.clone(),
        chart,
        qe,
        expected,
        default_nodes,
        expected_fail,
        profile,
    })
}
