//! Coordinate charts carrying a Riemannian metric.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Metric components at a point.
pub type MetricFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;
/// Metric components together with their first and second coordinate derivatives.
pub type MetricJetFn = dyn Fn(&[f64]) -> MetricJet + Send + Sync;

/// A coordinate interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn unbounded() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Distance from `x` to the nearer finite end (infinite for a line).
    pub fn clearance(&self, x: f64) -> f64 {
        (x - self.lo).min(self.hi - x)
    }
}

/// Map from the reference interval (-1, 1) onto one coordinate axis.
///
/// Bounded axes use the affine map; unbounded axes are compactified with
/// `x = center + scale * tan(pi t / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisMap {
    Affine { lo: f64, hi: f64 },
    Tangent { center: f64, scale: f64 },
}

impl AxisMap {
    /// Coordinate value and Jacobian dx/dt at reference parameter `t`.
    pub fn map(&self, t: f64) -> (f64, f64) {
        match *self {
            AxisMap::Affine { lo, hi } => {
                let half = 0.5 * (hi - lo);
                (lo + half * (t + 1.0), half)
            }
            AxisMap::Tangent { center, scale } => {
                let theta = FRAC_PI_2 * t;
                let c = theta.cos();
                (center + scale * theta.tan(), scale * FRAC_PI_2 / (c * c))
            }
        }
    }

    pub fn default_for(interval: &Interval) -> Self {
        if interval.is_bounded() {
            AxisMap::Affine {
                lo: interval.lo,
                hi: interval.hi,
            }
        } else {
            AxisMap::Tangent {
                center: 0.0,
                scale: 1.0,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

/// Metric with first and second coordinate derivatives at one point.
///
/// `dg[k]` is the matrix of `d g_ij / dx^k`; `d2g[k * n + l]` holds
/// `d^2 g_ij / dx^k dx^l`.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub dg: Vec<DMatrix<f64>>,
    pub d2g: Vec<DMatrix<f64>>,
}

impl MetricJet {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn d2(&self, k: usize, l: usize) -> &DMatrix<f64> {
        &self.d2g[k * self.dim() + l]
    }
}

/// Which derivative route produced a [`MetricJet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeSource {
    Analytic,
    FiniteDifference,
}

/// A single coordinate chart with its metric.
#[derive(Clone)]
pub struct MetricChart {
    dim: usize,
    domain: Vec<Interval>,
    axis_maps: Vec<AxisMap>,
    metric: Arc<MetricFn>,
    jet: Option<Arc<MetricJetFn>>,
    orientation: Orientation,
    label: String,
    /// Relative finite-difference step; multiplied by the axis extent
    /// (bounded axes) or by `s (1 + rho^2)` (unbounded axes, see [`MetricChart::fd_steps`]).
    fd_relative_step: f64,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("analytic_derivatives", &self.jet.is_some())
            .field("orientation", &self.orientation)
            .finish()
    }
}

pub const DEFAULT_FD_RELATIVE_STEP: f64 = 1e-3;

impl MetricChart {
    pub fn new<F>(label: impl Into<String>, domain: Vec<Interval>, metric: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        let dim = domain.len();
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "chart dimension must be at least 2, got {dim}"
            )));
        }
        if domain.iter().any(|iv| !(iv.lo < iv.hi)) {
            return Err(Error::InvalidParameter("every domain interval needs lo < hi".into()));
        }
        let axis_maps = domain.iter().map(AxisMap::default_for).collect();
        Ok(Self {
            dim,
            domain,
            axis_maps,
            metric: Arc::new(metric),
            jet: None,
            orientation: Orientation::Positive,
            label: label.into(),
            fd_relative_step: DEFAULT_FD_RELATIVE_STEP,
        })
    }

    /// Attach analytic first and second derivatives of the metric.
    pub fn with_jet<J>(mut self, jet: J) -> Self
    where
        J: Fn(&[f64]) -> MetricJet + Send + Sync + 'static,
    {
        self.jet = Some(Arc::new(jet));
        self
    }

    /// Drop analytic derivatives so every derivative goes through finite differences.
    pub fn without_jet(mut self) -> Self {
        self.jet = None;
        self
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_axis_maps(mut self, maps: Vec<AxisMap>) -> Result<Self> {
        if maps.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: maps.len(),
            });
        }
        self.axis_maps = maps;
        Ok(self)
    }

    pub fn with_fd_relative_step(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidParameter("finite-difference step must be > 0".into()));
        }
        self.fd_relative_step = step;
        Ok(self)
    }

    /// Same chart with reversed orientation.
    pub fn flipped(&self) -> Self {
        let mut c = self.clone();
        c.orientation = self.orientation.flipped();
        c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn axis_maps(&self) -> &[AxisMap] {
        &self.axis_maps
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.jet.is_some()
    }

    pub fn fd_relative_step(&self) -> f64 {
        self.fd_relative_step
    }

    pub fn metric(&self, p: &[f64]) -> DMatrix<f64> {
        (self.metric)(p)
    }

    /// Map a point of the reference box (-1, 1)^n into the chart; also
    /// returns the Jacobian determinant of the substitution.
    pub fn from_reference(&self, t: &[f64]) -> (Vec<f64>, f64) {
        let mut x = Vec::with_capacity(self.dim);
        let mut jac = 1.0;
        for (map, &ti) in self.axis_maps.iter().zip(t) {
            let (xi, di) = map.map(ti);
            x.push(xi);
            jac *= di;
        }
        (x, jac)
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: p.len(),
            });
        }
        let inside = p
            .iter()
            .zip(&self.domain)
            .all(|(&x, iv)| x.is_finite() && x > iv.lo && x < iv.hi);
        if inside {
            Ok(())
        } else {
            Err(Error::OutsideDomain { point: p.to_vec() })
        }
    }

    /// Per-axis finite-difference step at `p`, shrunk so a stencil of
    /// half-width `reach * h` stays inside the domain. Unbounded axes follow
    /// their tangent compactification: with `rho` the radius of the scaled
    /// unbounded coordinates, the base step is `scale * (1 + rho^2)`, i.e.
    /// uniform in the reference variable and shared by those axes.
    pub fn fd_steps(&self, p: &[f64], scale: f64, reach: f64) -> Vec<f64> {
        let tangent = |i: usize| match self.axis_maps[i] {
            AxisMap::Tangent { center, scale } => (center, scale),
            AxisMap::Affine { .. } => (0.0, 1.0),
        };
        let rho2: f64 = p
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.domain[*i].is_bounded())
            .map(|(i, x)| {
                let (c, s) = tangent(i);
                ((x - c) / s).powi(2)
            })
            .sum();
        p.iter()
            .zip(&self.domain)
            .enumerate()
            .map(|(i, (&x, iv))| {
                let base = if iv.is_bounded() {
                    iv.width()
                } else {
                    tangent(i).1 * (1.0 + rho2)
                };
                let h = self.fd_relative_step * scale * base;
                let room = iv.clearance(x) / (2.0 * reach);
                h.min(room)
            })
            .collect()
    }

    /// Metric and derivatives, analytic when available.
    pub fn jet(&self, p: &[f64]) -> Result<(MetricJet, DerivativeSource)> {
        self.check_point(p)?;
        let out = match &self.jet {
            Some(j) => (j(p), DerivativeSource::Analytic),
            None => (self.fd_jet(p)?, DerivativeSource::FiniteDifference),
        };
        ensure_spd(&out.0.g, p)?;
        Ok(out)
    }

    /// Finite-difference jet with one Richardson level (steps h and h/2).
    pub fn fd_jet(&self, p: &[f64]) -> Result<MetricJet> {
        self.check_point(p)?;
        let h = self.fd_steps(p, 1.0, 1.0);
        let coarse = central_jet(&*self.metric, p, &h);
        let half: Vec<f64> = h.iter().map(|v| 0.5 * v).collect();
        let fine = central_jet(&*self.metric, p, &half);
        let richardson = |a: &DMatrix<f64>, b: &DMatrix<f64>| (b * 4.0 - a) / 3.0;
        Ok(MetricJet {
            g: fine.g.clone(),
            dg: coarse.dg.iter().zip(&fine.dg).map(|(a, b)| richardson(a, b)).collect(),
            d2g: coarse
                .d2g
                .iter()
                .zip(&fine.d2g)
                .map(|(a, b)| richardson(a, b))
                .collect(),
        })
    }

    /// Plain central-difference first derivatives with an explicit uniform
    /// step `h` (no extrapolation); used for consistency checks of analytic
    /// derivatives.
    pub fn central_first_derivatives(&self, p: &[f64], h: f64) -> Result<Vec<DMatrix<f64>>> {
        self.check_point(p)?;
        let steps = vec![h; self.dim];
        Ok(central_jet(&*self.metric, p, &steps).dg)
    }
}

fn ensure_spd(g: &DMatrix<f64>, p: &[f64]) -> Result<()> {
    if g.iter().any(|v| !v.is_finite()) || g.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite { point: p.to_vec() });
    }
    Ok(())
}

fn central_jet(metric: &MetricFn, p: &[f64], h: &[f64]) -> MetricJet {
    let n = p.len();
    let g0 = metric(p);
    let shifted = |moves: &[(usize, f64)]| {
        let mut q = p.to_vec();
        for &(k, d) in moves {
            q[k] += d;
        }
        metric(&q)
    };
    let mut dg = Vec::with_capacity(n);
    let mut d2g = vec![DMatrix::zeros(n, n); n * n];
    for k in 0..n {
        let gp = shifted(&[(k, h[k])]);
        let gm = shifted(&[(k, -h[k])]);
        dg.push((&gp - &gm) / (2.0 * h[k]));
        d2g[k * n + k] = (&gp - &g0 * 2.0 + &gm) / (h[k] * h[k]);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let pp = shifted(&[(k, h[k]), (l, h[l])]);
            let pm = shifted(&[(k, h[k]), (l, -h[l])]);
            let mp = shifted(&[(k, -h[k]), (l, h[l])]);
            let mm = shifted(&[(k, -h[k]), (l, -h[l])]);
            let v = (pp - pm - mp + mm) / (4.0 * h[k] * h[l]);
            d2g[l * n + k] = v.clone();
            d2g[k * n + l] = v;
        }
    }
    MetricJet { g: g0, dg, d2g }
}

/// Jet of the conformally flat metric `exp(2 phi) delta` from the value,
/// gradient and Hessian of `phi`.
pub fn conformal_jet(phi: f64, dphi: &[f64], d2phi: &DMatrix<f64>) -> MetricJet {
    let n = dphi.len();
    let e = (2.0 * phi).exp();
    let id = DMatrix::<f64>::identity(n, n);
    let g = &id * e;
    let dg = dphi.iter().map(|&d| &id * (2.0 * d * e)).collect();
    let mut d2g = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            d2g.push(&id * ((4.0 * dphi[k] * dphi[l] + 2.0 * d2phi[(k, l)]) * e));
        }
    }
    MetricJet { g, dg, d2g }
}

/// Block-diagonal jet of a Riemannian product; coordinates of the factors
/// are concatenated in order.
pub fn product_jet(a: &MetricJet, b: &MetricJet) -> MetricJet {
    let (na, nb) = (a.dim(), b.dim());
    let n = na + nb;
    let block = |x: Option<&DMatrix<f64>>, y: Option<&DMatrix<f64>>| {
        let mut m = DMatrix::zeros(n, n);
        if let Some(x) = x {
            m.view_mut((0, 0), (na, na)).copy_from(x);
        }
        if let Some(y) = y {
            m.view_mut((na, na), (nb, nb)).copy_from(y);
        }
        m
    };
    let g = block(Some(&a.g), Some(&b.g));
    let dg = (0..n)
        .map(|k| {
            if k < na {
                block(Some(&a.dg[k]), None)
            } else {
                block(None, Some(&b.dg[k - na]))
            }
        })
        .collect();
    let mut d2g = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            let m = match (k < na, l < na) {
                (true, true) => block(Some(a.d2(k, l)), None),
                (false, false) => block(None, Some(b.d2(k - na, l - na))),
                _ => DMatrix::zeros(n, n),
            };
            d2g.push(m);
        }
    }
    MetricJet { g, dg, d2g }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paraboloid_chart() -> MetricChart {
        // induced metric of z = x^2 + y^2
        MetricChart::new(
            "paraboloid",
            vec![Interval::new(-2.0, 2.0), Interval::new(-2.0, 2.0)],
            |p| {
                let (x, y) = (p[0], p[1]);
                DMatrix::from_row_slice(2, 2, &[1.0 + 4.0 * x * x, 4.0 * x * y, 4.0 * x * y, 1.0 + 4.0 * y * y])
            },
        )
        .unwrap()
    }

    #[test]
    fn tangent_map_round_trip() {
        let m = AxisMap::Tangent {
            center: 1.0,
            scale: 2.0,
        };
        let (x, j) = m.map(0.0);
        assert_eq!(x, 1.0);
        assert!((j - std::f64::consts::PI).abs() < 1e-15);
        let (x, _) = m.map(0.5);
        assert!((x - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fd_jet_matches_hand_derivatives() {
        let c = paraboloid_chart();
        let p = [0.3, -0.4];
        let jet = c.fd_jet(&p).unwrap();
        // d/dx g = [[8x, 4y],[4y, 0]], d2/dxdy g = [[0,4],[4,0]]
        let dx = DMatrix::from_row_slice(2, 2, &[8.0 * 0.3, -1.6, -1.6, 0.0]);
        assert!((&jet.dg[0] - dx).amax() < 1e-9);
        let dxy = DMatrix::from_row_slice(2, 2, &[0.0, 4.0, 4.0, 0.0]);
        assert!((jet.d2(0, 1) - dxy).amax() < 1e-7);
        assert!((jet.d2(0, 0)[(0, 0)] - 8.0).abs() < 1e-7);
    }

    #[test]
    fn rejects_points_outside_domain() {
        let c = paraboloid_chart();
        assert!(matches!(c.jet(&[2.0, 0.0]), Err(Error::OutsideDomain { .. })));
        assert!(matches!(c.jet(&[0.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn rejects_indefinite_metric() {
        let c = MetricChart::new("bad", vec![Interval::unbounded(), Interval::unbounded()], |_| {
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
        })
        .unwrap();
        assert!(matches!(c.jet(&[0.0, 0.0]), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn steps_shrink_near_boundary() {
        let c = paraboloid_chart();
        let h = c.fd_steps(&[1.999, 0.0], 1.0, 1.0);
        assert!(h[0] <= 0.0005 + 1e-15);
        assert!((h[1] - 4e-3).abs() < 1e-15);
    }
}
