//! Fixed-step RK4 integration of the geodesic equation.

use nalgebra::DMatrix;

use crate::comparison::GeodesicProfile;
use crate::error::{Error, Result};
use crate::tensor::chart::MetricChart;
use crate::tensor::curvature::{christoffel, curvature};

/// Maximum tolerated drift of `|gamma'|_g` from 1 over a run.
pub const ARCLENGTH_DRIFT_TOL: f64 = 1e-6;
const MAX_HALVINGS: usize = 12;

/// Result of a geodesic run.
#[derive(Debug, Clone)]
pub struct GeodesicRun {
    pub profile: GeodesicProfile,
    /// Coordinates at every profile sample.
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    /// True when the curve left the chart before reaching the requested length.
    pub truncated: bool,
    /// Step finally used after halving.
    pub step: f64,
    pub max_speed_drift: f64,
}

fn accel(chart: &MetricChart, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let gamma = christoffel(chart, x)?;
    let n = x.len();
    Ok((0..n)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc -= gamma.get(k, i, j) * v[i] * v[j];
                }
            }
            acc
        })
        .collect())
}

fn speed(g: &DMatrix<f64>, v: &[f64]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += g[(i, j)] * v[i] * v[j];
        }
    }
    acc.sqrt()
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| yi + a * xi).collect()
}

struct RawRun {
    xs: Vec<Vec<f64>>,
    vs: Vec<Vec<f64>>,
    truncated: bool,
    drift: f64,
}

fn integrate(chart: &MetricChart, p: &[f64], v0: &[f64], length: f64, samples: usize, stride: usize) -> Result<RawRun> {
    let steps = samples * stride;
    let h = length / steps as f64;
    let mut x = p.to_vec();
    let mut v = v0.to_vec();
    let mut xs = vec![x.clone()];
    let mut vs = vec![v.clone()];
    let mut drift = 0.0f64;
    let mut truncated = false;
    for s in 1..=steps {
        let stage = || -> Result<(Vec<f64>, Vec<f64>)> {
            let a1 = accel(chart, &x, &v)?;
            let x2 = axpy(0.5 * h, &v, &x);
            let v2 = axpy(0.5 * h, &a1, &v);
            let a2 = accel(chart, &x2, &v2)?;
            let x3 = axpy(0.5 * h, &v2, &x);
            let v3 = axpy(0.5 * h, &a2, &v);
            let a3 = accel(chart, &x3, &v3)?;
            let x4 = axpy(h, &v3, &x);
            let v4 = axpy(h, &a3, &v);
            let a4 = accel(chart, &x4, &v4)?;
            let n = x.len();
            let xn = (0..n)
                .map(|i| x[i] + h / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]))
                .collect();
            let vn = (0..n)
                .map(|i| v[i] + h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]))
                .collect();
            Ok((xn, vn))
        };
        match stage() {
            Ok((xn, vn)) if chart.check_point(&xn).is_ok() => {
                x = xn;
                v = vn;
            }
            Ok(_) | Err(Error::OutsideDomain { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
        drift = drift.max((speed(&chart.metric(&x), &v) - 1.0).abs());
        if s % stride == 0 || s == steps {
            xs.push(x.clone());
            vs.push(v.clone());
        }
    }
    Ok(RawRun {
        xs,
        vs,
        truncated,
        drift,
    })
}

/// Integrate the unit-speed geodesic from `p` in direction `v` for the given
/// arclength. The step is halved until the speed drift stays below
/// [`ARCLENGTH_DRIFT_TOL`]; samples are reported at the original step
/// spacing. `potential`, when given, is sampled along the curve.
pub fn geodesic(
    chart: &MetricChart,
    p: &[f64],
    v: &[f64],
    length: f64,
    step: f64,
    potential: Option<&(dyn Fn(&[f64]) -> f64 + Sync)>,
) -> Result<GeodesicRun> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter("geodesic step must be > 0".into()));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidParameter("geodesic length must be > 0".into()));
    }
    chart.check_point(p)?;
    if v.len() != chart.dim() {
        return Err(Error::Dimension {
            expected: chart.dim(),
            got: v.len(),
        });
    }
    let norm = speed(&chart.metric(p), v);
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("initial velocity must be nonzero".into()));
    }
    let v0: Vec<f64> = v.iter().map(|c| c / norm).collect();

    let samples = (length / step).ceil() as usize;
    let spacing = length / samples as f64;
    let mut stride = 1usize;
    let mut run = integrate(chart, p, &v0, length, samples, stride)?;
    let mut halvings = 0;
    while run.drift >= ARCLENGTH_DRIFT_TOL && halvings < MAX_HALVINGS {
        halvings += 1;
        stride *= 2;
        run = integrate(chart, p, &v0, length, samples, stride)?;
    }
    if run.drift >= ARCLENGTH_DRIFT_TOL {
        return Err(Error::Numerical(format!(
            "arclength drift {:.3e} persists after {MAX_HALVINGS} step halvings",
            run.drift
        )));
    }

    let count = run.xs.len();
    let s: Vec<f64> = (0..count).map(|i| i as f64 * spacing).collect();
    let mut ric = Vec::with_capacity(count);
    for (x, vel) in run.xs.iter().zip(&run.vs) {
        ric.push(curvature(chart, x)?.ricci_quadratic(vel));
    }
    let f = potential.map(|pot| run.xs.iter().map(|x| pot(x)).collect());
    let profile = GeodesicProfile::new(s, ric, f)?;
    Ok(GeodesicRun {
        profile,
        points: run.xs,
        velocities: run.vs,
        truncated: run.truncated,
        step: spacing / stride as f64,
        max_speed_drift: run.drift,
    })
}
