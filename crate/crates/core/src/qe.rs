//! Residuals of the quasi-Einstein structure equations.
//!
//! For `(g, f, m, lambda)` the structure equation is
//! `Ric + Hess f - (1/m) df (x) df = lambda g`. Besides the tensor residual
//! this module evaluates its trace, the two derived curvature identities in
//! dimension four, the linear equation for `u = exp(-f/m)`, and the scalar
//! curvature lower bound.
//!
//! `grad R` and `Laplacian R` are always finite differences of the computed
//! scalar-curvature field, taken with step `30 h` where `h` is the metric
//! step. The error model is `O(h_R^2) + O(h^2 / h_R^2)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{curvature, CurvatureBundle, MetricChart, Sampler};

pub type PotentialFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
/// Gradient and Hessian of the potential in chart coordinates.
pub type PotentialDerivFn = dyn Fn(&[f64]) -> (Vec<f64>, DMatrix<f64>) + Send + Sync;

/// Scale of the step used to differentiate the scalar curvature field,
/// relative to the metric finite-difference step.
pub const SCALAR_FIELD_STEP_FACTOR: f64 = 30.0;

/// Potential, order and Einstein constant of a quasi-Einstein structure.
#[derive(Clone)]
pub struct QEData {
    f: Arc<PotentialFn>,
    derivs: Option<Arc<PotentialDerivFn>>,
    pub m: f64,
    pub lambda: f64,
    pub n: usize,
    constant: bool,
}

impl std::fmt::Debug for QEData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QEData")
            .field("m", &self.m)
            .field("lambda", &self.lambda)
            .field("n", &self.n)
            .field("constant_potential", &self.constant)
            .field("analytic_derivatives", &self.derivs.is_some())
            .finish()
    }
}

impl QEData {
    pub fn new<F>(n: usize, m: f64, lambda: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if !(m > 0.0) {
            return Err(Error::InvalidParameter(format!("m must be > 0, got {m}")));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {n}")));
        }
        Ok(Self {
            f: Arc::new(f),
            derivs: None,
            m,
            lambda,
            n,
            constant: false,
        })
    }

    /// Constant potential `f = 0` (the trivial, Einstein case).
    pub fn trivial(n: usize, m: f64, lambda: f64) -> Result<Self> {
        let mut q = Self::new(n, m, lambda, |_| 0.0)?.with_derivatives(move |_| (vec![0.0; n], DMatrix::zeros(n, n)));
        q.constant = true;
        Ok(q)
    }

    pub fn with_derivatives<D>(mut self, d: D) -> Self
    where
        D: Fn(&[f64]) -> (Vec<f64>, DMatrix<f64>) + Send + Sync + 'static,
    {
        self.derivs = Some(Arc::new(d));
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_m(mut self, m: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::InvalidParameter(format!("m must be > 0, got {m}")));
        }
        self.m = m;
        Ok(self)
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.derivs.is_some()
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        (self.f)(p)
    }

    pub fn potential_fn(&self) -> Arc<PotentialFn> {
        self.f.clone()
    }

    /// Value, coordinate gradient and coordinate Hessian of `f`.
    pub fn jet(&self, chart: &MetricChart, p: &[f64]) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
        let v = self.value(p);
        if let Some(d) = &self.derivs {
            let (g, h) = d(p);
            return Ok((v, g, h));
        }
        let h = chart.fd_steps(p, 1.0, 1.0);
        let coarse = fd_scalar_jet(&*self.f, p, &h);
        let half: Vec<f64> = h.iter().map(|x| 0.5 * x).collect();
        let fine = fd_scalar_jet(&*self.f, p, &half);
        let grad = coarse.0.iter().zip(&fine.0).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
        let hess = (fine.1 * 4.0 - coarse.1) / 3.0;
        Ok((v, grad, hess))
    }

    fn require_m(&self, min: f64, what: &str) -> Result<()> {
        if !(self.m > min) {
            return Err(Error::InvalidParameter(format!(
                "{what} requires m > {min}, got m = {}",
                self.m
            )));
        }
        Ok(())
    }
}

/// Central differences for gradient and Hessian of a scalar function.
fn fd_scalar_jet<F: Fn(&[f64]) -> f64 + ?Sized>(f: &F, p: &[f64], h: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let n = p.len();
    let at = |moves: &[(usize, f64)]| {
        let mut q = p.to_vec();
        for &(k, d) in moves {
            q[k] += d;
        }
        f(&q)
    };
    let f0 = f(p);
    let mut grad = vec![0.0; n];
    let mut hess = DMatrix::zeros(n, n);
    for k in 0..n {
        let fp = at(&[(k, h[k])]);
        let fm = at(&[(k, -h[k])]);
        grad[k] = (fp - fm) / (2.0 * h[k]);
        hess[(k, k)] = (fp - 2.0 * f0 + fm) / (h[k] * h[k]);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let v = (at(&[(k, h[k]), (l, h[l])]) - at(&[(k, h[k]), (l, -h[l])]) - at(&[(k, -h[k]), (l, h[l])])
                + at(&[(k, -h[k]), (l, -h[l])]))
                / (4.0 * h[k] * h[l]);
            hess[(k, l)] = v;
            hess[(l, k)] = v;
        }
    }
    (grad, hess)
}

/// First and second covariant data of the potential at a point.
#[derive(Debug, Clone)]
pub struct PotentialData {
    pub value: f64,
    /// Coordinate differential `df`.
    pub df: Vec<f64>,
    /// Covariant Hessian `nabla^2 f`.
    pub hessian: DMatrix<f64>,
    pub laplacian: f64,
    /// `|grad f|^2`.
    pub grad_sq: f64,
}

pub fn potential_data(chart: &MetricChart, qe: &QEData, b: &CurvatureBundle) -> Result<PotentialData> {
    let (value, df, d2f) = qe.jet(chart, &b.point)?;
    let n = df.len();
    let mut hessian = d2f;
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += b.christoffel.get(k, i, j) * df[k];
            }
            hessian[(i, j)] -= acc;
        }
    }
    let laplacian = (&b.metric_inv * &hessian).trace();
    let grad_sq = quad_form(&b.metric_inv, &df, &df);
    Ok(PotentialData {
        value,
        df,
        hessian,
        laplacian,
        grad_sq,
    })
}

fn quad_form(a: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * x[i] * y[j];
        }
    }
    acc
}

/// `|T|_g` for a covariant 2-tensor.
pub fn tensor_norm(ginv: &DMatrix<f64>, t: &DMatrix<f64>) -> f64 {
    let raised = ginv * t * ginv;
    raised.component_mul(t).sum().max(0.0).sqrt()
}

fn check_dim(chart: &MetricChart, qe: &QEData) -> Result<()> {
    if chart.dim() != qe.n {
        return Err(Error::Dimension {
            expected: chart.dim(),
            got: qe.n,
        });
    }
    Ok(())
}

/// Tensor residual of the structure equation at a point.
#[derive(Debug, Clone)]
pub struct QeResidual {
    /// `Ric + Hess f - (1/m) df (x) df - lambda g`.
    pub tensor: DMatrix<f64>,
    pub norm: f64,
}

pub fn qe_residual(chart: &MetricChart, qe: &QEData, p: &[f64]) -> Result<QeResidual> {
    check_dim(chart, qe)?;
    let b = curvature(chart, p)?;
    let pot = potential_data(chart, qe, &b)?;
    Ok(qe_residual_from(&b, &pot, qe))
}

pub(crate) fn qe_residual_from(b: &CurvatureBundle, pot: &PotentialData, qe: &QEData) -> QeResidual {
    let n = pot.df.len();
    let mut t = &b.ricci + &pot.hessian - &b.metric * qe.lambda;
    for i in 0..n {
        for j in 0..n {
            t[(i, j)] -= pot.df[i] * pot.df[j] / qe.m;
        }
    }
    let norm = tensor_norm(&b.metric_inv, &t);
    QeResidual { tensor: t, norm }
}

/// Trace residual `R + Laplacian f - |grad f|^2/m - n lambda` (any dimension).
pub fn trace_residual(chart: &MetricChart, qe: &QEData, p: &[f64]) -> Result<f64> {
    check_dim(chart, qe)?;
    let b = curvature(chart, p)?;
    let pot = potential_data(chart, qe, &b)?;
    Ok(trace_residual_from(&b, &pot, qe))
}

fn trace_residual_from(b: &CurvatureBundle, pot: &PotentialData, qe: &QEData) -> f64 {
    b.scalar + pot.laplacian - pot.grad_sq / qe.m - qe.n as f64 * qe.lambda
}

/// Scalar curvature and its coordinate gradient and covariant Laplacian,
/// differentiated numerically from the computed scalar field.
#[derive(Debug, Clone)]
pub struct ScalarFieldDerivatives {
    pub grad: Vec<f64>,
    pub laplacian: f64,
}

fn scalar_at(chart: &MetricChart, q: &[f64]) -> Result<f64> {
    Ok(curvature(chart, q)?.scalar)
}

/// Coordinate gradient of `R` at `p` by central differences with step `30 h`.
pub fn scalar_gradient(chart: &MetricChart, p: &[f64]) -> Result<Vec<f64>> {
    let h = chart.fd_steps(p, SCALAR_FIELD_STEP_FACTOR, 1.0);
    let mut grad = Vec::with_capacity(p.len());
    for k in 0..p.len() {
        let mut q = p.to_vec();
        q[k] = p[k] + h[k];
        let rp = scalar_at(chart, &q)?;
        q[k] = p[k] - h[k];
        let rm = scalar_at(chart, &q)?;
        grad.push((rp - rm) / (2.0 * h[k]));
    }
    Ok(grad)
}

/// Gradient and Laplacian of `R` at `p`.
pub fn scalar_field_derivatives(chart: &MetricChart, b: &CurvatureBundle) -> Result<ScalarFieldDerivatives> {
    let p = &b.point;
    let h = chart.fd_steps(p, SCALAR_FIELD_STEP_FACTOR, 1.0);
    let field = |q: &[f64]| scalar_at(chart, q);
    let n = p.len();
    let r0 = b.scalar;
    let shifted = |moves: &[(usize, f64)]| -> Result<f64> {
        let mut q = p.clone();
        for &(k, d) in moves {
            q[k] += d;
        }
        field(&q)
    };
    let mut grad = vec![0.0; n];
    let mut hess = DMatrix::zeros(n, n);
    for k in 0..n {
        let rp = shifted(&[(k, h[k])])?;
        let rm = shifted(&[(k, -h[k])])?;
        grad[k] = (rp - rm) / (2.0 * h[k]);
        hess[(k, k)] = (rp - 2.0 * r0 + rm) / (h[k] * h[k]);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            if b.metric_inv[(k, l)] == 0.0 {
                continue;
            }
            let v = (shifted(&[(k, h[k]), (l, h[l])])?
                - shifted(&[(k, h[k]), (l, -h[l])])?
                - shifted(&[(k, -h[k]), (l, h[l])])?
                + shifted(&[(k, -h[k]), (l, -h[l])])?)
                / (4.0 * h[k] * h[l]);
            hess[(k, l)] = v;
            hess[(l, k)] = v;
        }
    }
    let mut laplacian = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut cov = hess[(i, j)];
            for k in 0..n {
                cov -= b.christoffel.get(k, i, j) * grad[k];
            }
            laplacian += b.metric_inv[(i, j)] * cov;
        }
    }
    Ok(ScalarFieldDerivatives { grad, laplacian })
}

/// Residuals of the three four-dimensional curvature identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarIdentityResiduals {
    /// `R + Laplacian f - |grad f|^2/m - 4 lambda`.
    pub r1: f64,
    /// Norm of `(1/2) dR - ((m-1)/m) Ric(grad f) - (1/m)(R - 3 lambda) df`.
    pub r2: f64,
    /// `Laplacian R` minus its closed form.
    pub r3: f64,
}

impl ScalarIdentityResiduals {
    pub fn max_abs(&self) -> f64 {
        self.r1.abs().max(self.r2.abs()).max(self.r3.abs())
    }
}

/// Closed-form right-hand side of the `Laplacian R` identity.
pub fn laplacian_r_closed_form(m: f64, lambda: f64, scalar: f64, ricci_sq: f64, grad_r_dot_grad_f: f64) -> f64 {
    (m + 2.0) / m * grad_r_dot_grad_f - 2.0 * (m - 1.0) / m * ricci_sq - 2.0 / m * scalar * scalar
        + 2.0 * (m + 6.0) / m * lambda * scalar
        - 24.0 / m * lambda * lambda
}

pub fn scalar_identity_residuals(chart: &MetricChart, qe: &QEData, p: &[f64]) -> Result<ScalarIdentityResiduals> {
    check_dim(chart, qe)?;
    if qe.n != 4 {
        return Err(Error::InvalidParameter(format!(
            "the curvature identities are four-dimensional, got n = {}",
            qe.n
        )));
    }
    qe.require_m(1.0, "the curvature identities")?;
    let b = curvature(chart, p)?;
    let pot = potential_data(chart, qe, &b)?;
    let sd = scalar_field_derivatives(chart, &b)?;
    Ok(scalar_identity_from(&b, &pot, &sd, qe))
}

fn scalar_identity_from(
    b: &CurvatureBundle,
    pot: &PotentialData,
    sd: &ScalarFieldDerivatives,
    qe: &QEData,
) -> ScalarIdentityResiduals {
    let m = qe.m;
    let lambda = qe.lambda;
    let n = pot.df.len();
    let r1 = trace_residual_from(b, pot, qe);

    // Ric(grad f) as a covector: Ric_ij g^jk f_k
    let grad_f: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| b.metric_inv[(i, j)] * pot.df[j]).sum())
        .collect();
    let v: Vec<f64> = (0..n)
        .map(|i| {
            let ric_gf: f64 = (0..n).map(|j| b.ricci[(i, j)] * grad_f[j]).sum();
            0.5 * sd.grad[i] - (m - 1.0) / m * ric_gf - (b.scalar - 3.0 * lambda) / m * pot.df[i]
        })
        .collect();
    let r2 = quad_form(&b.metric_inv, &v, &v).max(0.0).sqrt();

    let dot = quad_form(&b.metric_inv, &sd.grad, &pot.df);
    let r3 = sd.laplacian - laplacian_r_closed_form(m, lambda, b.scalar, b.norms.ricci_sq, dot);
    ScalarIdentityResiduals { r1, r2, r3 }
}

/// `Laplacian u - (1/m)(R - n lambda) u` for `u = exp(-f/m)`, with
/// `Laplacian u = -(u/m)(Laplacian f - |grad f|^2/m)`.
pub fn u_identity_residual(chart: &MetricChart, qe: &QEData, p: &[f64]) -> Result<f64> {
    check_dim(chart, qe)?;
    qe.require_m(0.0, "the u-identity")?;
    let b = curvature(chart, p)?;
    let pot = potential_data(chart, qe, &b)?;
    Ok(u_identity_from(&b, &pot, qe))
}

fn u_identity_from(b: &CurvatureBundle, pot: &PotentialData, qe: &QEData) -> f64 {
    let m = qe.m;
    let u = (-pot.value / m).exp();
    let lap_u = -(u / m) * (pot.laplacian - pot.grad_sq / m);
    lap_u - (b.scalar - qe.n as f64 * qe.lambda) * u / m
}

/// Covariant Laplacian of an arbitrary scalar function by Richardson-extrapolated
/// central differences (independent of the chain rule used above).
pub fn laplacian_fd<F: Fn(&[f64]) -> f64>(chart: &MetricChart, f: F, p: &[f64]) -> Result<f64> {
    let b = curvature(chart, p)?;
    let h = chart.fd_steps(p, 1.0, 1.0);
    let coarse = fd_scalar_jet(&f, p, &h);
    let half: Vec<f64> = h.iter().map(|x| 0.5 * x).collect();
    let fine = fd_scalar_jet(&f, p, &half);
    let n = p.len();
    let grad: Vec<f64> = (0..n).map(|k| (4.0 * fine.0[k] - coarse.0[k]) / 3.0).collect();
    let hess = (fine.1 * 4.0 - coarse.1) / 3.0;
    let mut lap = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut cov = hess[(i, j)];
            for k in 0..n {
                cov -= b.christoffel.get(k, i, j) * grad[k];
            }
            lap += b.metric_inv[(i, j)] * cov;
        }
    }
    Ok(lap)
}

/// Sampled check of `R >= 12 lambda/(m+3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarBoundReport {
    pub min_scalar: f64,
    pub witness: Vec<f64>,
    pub threshold: f64,
    pub pass: bool,
}

pub fn scalar_bound_check(chart: &MetricChart, qe: &QEData, sampler: &Sampler) -> Result<ScalarBoundReport> {
    check_dim(chart, qe)?;
    if qe.n != 4 {
        return Err(Error::InvalidParameter("scalar bound is stated for n = 4".into()));
    }
    qe.require_m(1.0, "the scalar curvature bound")?;
    if !(qe.lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "the scalar curvature bound needs lambda > 0, got {}",
            qe.lambda
        )));
    }
    let pts = sampler.points(chart);
    if pts.is_empty() {
        return Err(Error::EmptySample);
    }
    let vals: Vec<f64> = pts.par_iter().map(|p| scalar_at(chart, p)).collect::<Result<_>>()?;
    let (idx, min_scalar) = vals
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let threshold = 12.0 * qe.lambda / (qe.m + 3.0);
    Ok(ScalarBoundReport {
        min_scalar,
        witness: pts[idx].clone(),
        threshold,
        pass: min_scalar >= threshold,
    })
}

/// All pointwise residuals at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResiduals {
    pub qe_norm: f64,
    pub trace: f64,
    /// Absent unless `n = 4` and `m > 1`.
    pub scalar_identities: Option<ScalarIdentityResiduals>,
    pub u_identity: f64,
    pub scalar: f64,
}

pub fn point_residuals(chart: &MetricChart, qe: &QEData, p: &[f64]) -> Result<PointResiduals> {
    check_dim(chart, qe)?;
    let b = curvature(chart, p)?;
    let pot = potential_data(chart, qe, &b)?;
    let scalar_identities = if qe.n == 4 && qe.m > 1.0 {
        let sd = scalar_field_derivatives(chart, &b)?;
        Some(scalar_identity_from(&b, &pot, &sd, qe))
    } else {
        None
    };
    Ok(PointResiduals {
        qe_norm: qe_residual_from(&b, &pot, qe).norm,
        trace: trace_residual_from(&b, &pot, qe),
        scalar_identities,
        u_identity: u_identity_from(&b, &pot, qe),
        scalar: b.scalar,
    })
}

/// Maximum and mean of absolute values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub max: f64,
    pub mean: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        Self {
            max: abs.iter().copied().fold(0.0, f64::max),
            mean: crate::sum::pairwise_sum(&abs) / abs.len() as f64,
        }
    }
}

/// Residual statistics over a point sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSummary {
    pub points: usize,
    pub qe_norm: Stat,
    pub trace: Stat,
    pub r1: Option<Stat>,
    pub r2: Option<Stat>,
    pub r3: Option<Stat>,
    pub u_identity: Stat,
    pub min_scalar: f64,
}

pub fn residual_summary(chart: &MetricChart, qe: &QEData, points: &[Vec<f64>]) -> Result<ResidualSummary> {
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    let rows: Vec<PointResiduals> = points
        .par_iter()
        .map(|p| point_residuals(chart, qe, p))
        .collect::<Result<_>>()?;
    let col = |f: &dyn Fn(&PointResiduals) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let has_l1 = rows.iter().all(|r| r.scalar_identities.is_some());
    let l1 = |f: &dyn Fn(&ScalarIdentityResiduals) -> f64| {
        has_l1.then(|| Stat::of(&col(&|r| f(r.scalar_identities.as_ref().unwrap()))))
    };
    Ok(ResidualSummary {
        points: rows.len(),
        qe_norm: Stat::of(&col(&|r| r.qe_norm)),
        trace: Stat::of(&col(&|r| r.trace)),
        r1: l1(&|l| l.r1),
        r2: l1(&|l| l.r2),
        r3: l1(&|l| l.r3),
        u_identity: Stat::of(&col(&|r| r.u_identity)),
        min_scalar: rows.iter().map(|r| r.scalar).fold(f64::INFINITY, f64::min),
    })
}

/// CSV with one row per point: coordinates, r1, |r2|, r3, |qe residual|.
pub fn write_residual_csv<W: std::io::Write>(
    chart: &MetricChart,
    qe: &QEData,
    points: &[Vec<f64>],
    out: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let n = chart.dim();
    let mut header: Vec<String> = (0..n).map(|i| format!("x{}", i + 1)).collect();
    header.extend(["r1", "r2", "r3", "qe_residual"].iter().map(|s| s.to_string()));
    wtr.write_record(&header)?;
    for p in points {
        let r = point_residuals(chart, qe, p)?;
        let mut row: Vec<String> = p.iter().map(|v| format!("{v:.12e}")).collect();
        let (r1, r2, r3) = match r.scalar_identities {
            Some(l) => (l.r1, l.r2, l.r3),
            None => (r.trace, f64::NAN, f64::NAN),
        };
        for v in [r1, r2, r3, r.qe_norm] {
            row.push(format!("{v:.12e}"));
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}
