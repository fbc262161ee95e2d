//! Curvature integrals over compactified charts: Euler characteristic and
//! signature estimates, the Hitchin-Thorpe combinations, the two integral
//! identities for quasi-Einstein structures, and the Gursky and Yamabe
//! integral checks.

pub mod quadrature;

use std::f64::consts::PI;

use crate::bounds::{scalar_sq_criterion, BoundsInput, QeOrder, ScalarSqVerdict};
use crate::error::{Error, Result};
use crate::qe::{potential_data, qe_residual_from, scalar_gradient, QEData};
use crate::tensor::{curvature, MetricChart};

pub use quadrature::{
    gauss_legendre, integrate, Compactification, Grid, Node, QuadratureRule, QuadratureSpec, Reduce, MIN_NODES_PER_AXIS,
};

const EIGHT_PI2: f64 = 8.0 * PI * PI;

/// Largest pointwise quasi-Einstein residual norm accepted before the
/// integral identities are evaluated.
pub const QE_GATE: f64 = 1e-4;

/// Relative tolerance for identities that are pure algebra of computed integrals.
pub const ALGEBRAIC_RTOL: f64 = 1e-9;

/// Integrals of the curvature quantities, plus sampled extrema over the nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureIntegrals {
    pub vol: f64,
    pub w_plus_sq: f64,
    pub w_minus_sq: f64,
    pub scalar_sq: f64,
    pub traceless_ricci_sq: f64,
    pub scalar: f64,
    /// `int <grad R, grad f>`; zero without a potential.
    pub grad_r_dot_grad_f: f64,
    /// `int R |grad f|^2`.
    pub scalar_grad_f_sq: f64,
    /// `int |grad f|^2`.
    pub grad_f_sq: f64,
    /// Minimum and maximum of `f` over the nodes.
    pub f_range: Option<(f64, f64)>,
    /// Minimum of `R` over interior nodes.
    pub min_scalar: f64,
    /// Largest pointwise residual norm of the structure equation over interior nodes.
    pub max_qe_residual: Option<f64>,
    pub nodes: usize,
}

impl CurvatureIntegrals {
    pub fn w_sq(&self) -> f64 {
        self.w_plus_sq + self.w_minus_sq
    }

    /// `(1/8 pi^2) int (|W|^2 + R^2/24 - |Ric0|^2/2)`.
    pub fn chi_hat(&self) -> f64 {
        (self.w_sq() + self.scalar_sq / 24.0 - 0.5 * self.traceless_ricci_sq) / EIGHT_PI2
    }

    /// `(1/12 pi^2) int (|W+|^2 - |W-|^2)`.
    pub fn tau_hat(&self) -> f64 {
        (self.w_plus_sq - self.w_minus_sq) / (12.0 * PI * PI)
    }

    /// `(1/4 pi^2) int (2|W+-|^2 + R^2/24 - |Ric0|^2/2)`, evaluated directly.
    pub fn ht(&self, plus: bool) -> f64 {
        let w = if plus { self.w_plus_sq } else { self.w_minus_sq };
        (2.0 * w + self.scalar_sq / 24.0 - 0.5 * self.traceless_ricci_sq) / (4.0 * PI * PI)
    }

    pub fn f_osc(&self) -> Option<f64> {
        self.f_range.map(|(lo, hi)| hi - lo)
    }

    /// `int (R^2 - 12 |Ric0|^2)`.
    pub fn yamabe_integrand(&self) -> f64 {
        self.scalar_sq - 12.0 * self.traceless_ricci_sq
    }
}

/// Integrate all curvature quantities; with `qe`, also the potential terms.
pub fn curvature_integrals(
    chart: &MetricChart,
    qe: Option<&QEData>,
    quad: &QuadratureSpec,
) -> Result<CurvatureIntegrals> {
    if chart.dim() != 4 {
        return Err(Error::Dimension {
            expected: 4,
            got: chart.dim(),
        });
    }
    if let Some(q) = qe {
        if q.n != 4 {
            return Err(Error::Dimension { expected: 4, got: q.n });
        }
    }
    use Reduce::{Max, Min, Sum};
    let grid = Grid::new(chart, quad)?;
    let kinds = [Sum, Sum, Sum, Sum, Sum, Sum, Sum, Sum, Sum, Min, Max, Min, Max];
    let v = grid.reduce(kinds, |node| {
        let b = curvature(chart, &node.point)?;
        let dv = node.weight * b.vol_density;
        let n = &b.norms;
        let mut out = [
            dv,
            dv * n.w_plus_sq,
            dv * n.w_minus_sq,
            dv * b.scalar * b.scalar,
            dv * n.traceless_ricci_sq,
            dv * b.scalar,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            if node.interior { b.scalar } else { f64::INFINITY },
            0.0,
        ];
        if let Some(q) = qe {
            let pot = potential_data(chart, q, &b)?;
            if pot.df.iter().any(|d| *d != 0.0) {
                let dr = scalar_gradient(chart, &node.point)?;
                let mut dot = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        dot += b.metric_inv[(i, j)] * dr[i] * pot.df[j];
                    }
                }
                out[6] = dv * dot;
            }
            out[7] = dv * b.scalar * pot.grad_sq;
            out[8] = dv * pot.grad_sq;
            out[9] = pot.value;
            out[10] = pot.value;
            if node.interior {
                out[12] = qe_residual_from(&b, &pot, q).norm;
            }
        }
        Ok(out)
    })?;
    Ok(CurvatureIntegrals {
        vol: v[0],
        w_plus_sq: v[1],
        w_minus_sq: v[2],
        scalar_sq: v[3],
        traceless_ricci_sq: v[4],
        scalar: v[5],
        grad_r_dot_grad_f: v[6],
        scalar_grad_f_sq: v[7],
        grad_f_sq: v[8],
        f_range: qe.map(|_| (v[9], v[10])),
        min_scalar: v[11],
        max_qe_residual: qe.map(|_| v[12]),
        nodes: grid.len(),
    })
}

/// Euler characteristic and signature estimates with the Hitchin-Thorpe
/// combinations and a resolution-based error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyReport {
    pub chi_hat: f64,
    pub tau_hat: f64,
    /// `2 chi + 3 tau` from the combined integrand.
    pub ht_plus: f64,
    /// `2 chi - 3 tau` from the combined integrand.
    pub ht_minus: f64,
    /// Largest gap between the combined-integrand route and `2 chi_hat +- 3 tau_hat`.
    pub route_gap: f64,
    pub integrals: CurvatureIntegrals,
    pub nodes_per_axis: usize,
    pub coarse_nodes_per_axis: usize,
    /// `|chi_hat - chi_hat(coarse)|`.
    pub chi_tolerance: f64,
    pub tau_tolerance: f64,
}

impl TopologyReport {
    pub fn from_integrals(
        fine: CurvatureIntegrals,
        coarse: Option<&CurvatureIntegrals>,
        nodes: usize,
        coarse_nodes: usize,
    ) -> Self {
        let (chi, tau) = (fine.chi_hat(), fine.tau_hat());
        let (hp, hm) = (fine.ht(true), fine.ht(false));
        let route_gap = (hp - (2.0 * chi + 3.0 * tau))
            .abs()
            .max((hm - (2.0 * chi - 3.0 * tau)).abs());
        let (chi_tolerance, tau_tolerance) = match coarse {
            Some(c) => ((chi - c.chi_hat()).abs(), (tau - c.tau_hat()).abs()),
            None => (f64::NAN, f64::NAN),
        };
        Self {
            chi_hat: chi,
            tau_hat: tau,
            ht_plus: hp,
            ht_minus: hm,
            route_gap,
            integrals: fine,
            nodes_per_axis: nodes,
            coarse_nodes_per_axis: coarse_nodes,
            chi_tolerance,
            tau_tolerance,
        }
    }

    /// Route consistency relative to the size of the combinations.
    pub fn routes_agree(&self) -> bool {
        let scale = self.ht_plus.abs().max(self.ht_minus.abs()).max(1.0);
        self.route_gap <= ALGEBRAIC_RTOL * scale
    }
}

/// Run at `quad` and at half resolution; the difference is the reported tolerance.
pub fn topology_report(chart: &MetricChart, qe: Option<&QEData>, quad: &QuadratureSpec) -> Result<TopologyReport> {
    let fine = curvature_integrals(chart, qe, quad)?;
    let coarse_spec = quad.halved();
    let coarse = if coarse_spec.nodes_per_axis < quad.nodes_per_axis {
        Some(curvature_integrals(chart, qe, &coarse_spec)?)
    } else {
        None
    };
    Ok(TopologyReport::from_integrals(
        fine,
        coarse.as_ref(),
        quad.nodes_per_axis,
        coarse_spec.nodes_per_axis,
    ))
}

pub fn gauss_bonnet_chern(chart: &MetricChart, quad: &QuadratureSpec) -> Result<f64> {
    Ok(curvature_integrals(chart, None, quad)?.chi_hat())
}

pub fn hirzebruch(chart: &MetricChart, quad: &QuadratureSpec) -> Result<f64> {
    Ok(curvature_integrals(chart, None, quad)?.tau_hat())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HtCheck {
    pub plus: f64,
    pub minus: f64,
    pub pass: bool,
}

pub fn ht_from(integrals: &CurvatureIntegrals, tol: f64) -> HtCheck {
    let (plus, minus) = (integrals.ht(true), integrals.ht(false));
    HtCheck {
        plus,
        minus,
        pass: plus >= -tol && minus >= -tol,
    }
}

pub fn ht_check(chart: &MetricChart, quad: &QuadratureSpec, tol: f64) -> Result<HtCheck> {
    Ok(ht_from(&curvature_integrals(chart, None, quad)?, tol))
}

/// Integral terms entering the two Euler-characteristic identities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerTerms {
    pub w_sq: f64,
    pub grad_f_sq: f64,
    pub scalar_grad_f_sq: f64,
    pub scalar_sq: f64,
    pub grad_r_dot_grad_f: f64,
    pub vol: f64,
}

impl From<&CurvatureIntegrals> for EulerTerms {
    fn from(c: &CurvatureIntegrals) -> Self {
        Self {
            w_sq: c.w_sq(),
            grad_f_sq: c.grad_f_sq,
            scalar_grad_f_sq: c.scalar_grad_f_sq,
            scalar_sq: c.scalar_sq,
            grad_r_dot_grad_f: c.grad_r_dot_grad_f,
            vol: c.vol,
        }
    }
}

fn require_m_gt_one(m: f64) -> Result<()> {
    if !(m > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "the Euler-characteristic identities require m > 1, got {m}"
        )));
    }
    Ok(())
}

/// Right-hand side of the identity for `8 pi^2 chi` written with `int R^2`.
pub fn euler_scal_rhs(m: f64, lambda: f64, t: &EulerTerms) -> Result<f64> {
    require_m_gt_one(m)?;
    let d = m - 1.0;
    Ok(
        t.w_sq + (m - 2.0) * lambda / (2.0 * m * d) * t.grad_f_sq + (m + 2.0) / (4.0 * m * d) * t.scalar_grad_f_sq
            - (m + 2.0) / (12.0 * d) * t.scalar_sq
            + 2.0 * (m + 1.0) / d * lambda * lambda * t.vol,
    )
}

/// Right-hand side of the identity for `8 pi^2 chi` written with `int <grad R, grad f>`.
pub fn euler_grad_rhs(m: f64, lambda: f64, t: &EulerTerms) -> Result<f64> {
    require_m_gt_one(m)?;
    let d = m - 1.0;
    Ok(
        t.w_sq + (m - 10.0) * lambda / (6.0 * m * d) * t.grad_f_sq + (m + 2.0) / (6.0 * m * d) * t.scalar_grad_f_sq
            - (m + 2.0) / (12.0 * d) * t.grad_r_dot_grad_f
            + 2.0 / 3.0 * lambda * lambda * t.vol,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerIdentityCheck {
    /// `8 pi^2 chi_hat`.
    pub lhs: f64,
    pub rhs_scal: f64,
    pub rhs_grad: f64,
    /// `|rhs - lhs| / |lhs|` (absolute when `lhs = 0`).
    pub residual_scal: f64,
    pub residual_grad: f64,
    pub max_qe_residual: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if b.abs() > 0.0 {
        d / b.abs()
    } else {
        d
    }
}

/// Evaluate both identities from precomputed integrals; refuses inputs whose
/// structure-equation residual exceeds [`QE_GATE`].
pub fn euler_identities_from(integrals: &CurvatureIntegrals, qe: &QEData) -> Result<EulerIdentityCheck> {
    require_m_gt_one(qe.m)?;
    let max_qe = integrals
        .max_qe_residual
        .ok_or_else(|| Error::InvalidParameter("integrals were computed without quasi-Einstein data".into()))?;
    if !(max_qe <= QE_GATE) {
        return Err(Error::Hypothesis(format!(
            "structure-equation residual {max_qe:.3e} exceeds {QE_GATE:.0e}; the identities hold only for quasi-Einstein data"
        )));
    }
    let t = EulerTerms::from(integrals);
    let lhs = EIGHT_PI2 * integrals.chi_hat();
    let rhs_scal = euler_scal_rhs(qe.m, qe.lambda, &t)?;
    let rhs_grad = euler_grad_rhs(qe.m, qe.lambda, &t)?;
    Ok(EulerIdentityCheck {
        lhs,
        rhs_scal,
        rhs_grad,
        residual_scal: rel(rhs_scal, lhs),
        residual_grad: rel(rhs_grad, lhs),
        max_qe_residual: max_qe,
    })
}

pub fn euler_identity_check(chart: &MetricChart, qe: &QEData, quad: &QuadratureSpec) -> Result<EulerIdentityCheck> {
    require_m_gt_one(qe.m)?;
    euler_identities_from(&curvature_integrals(chart, Some(qe), quad)?, qe)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GurskyCheck {
    /// `8 pi^2 (chi_hat - 2)`.
    pub lower: f64,
    pub w_plus_sq: f64,
    pub w_sq: f64,
    /// `8 pi^2 (chi - 2) <= int |W+|^2`.
    pub first_holds: bool,
    /// `int |W+|^2 <= int |W|^2`.
    pub second_holds: bool,
    pub min_scalar: f64,
}

/// Both Gursky inequalities; errors unless the scalar curvature is positive at every node.
pub fn gursky_from(integrals: &CurvatureIntegrals, tol: f64) -> Result<GurskyCheck> {
    if !(integrals.min_scalar > 0.0) {
        return Err(Error::Hypothesis(format!(
            "positive scalar curvature required, minimum over nodes is {}",
            integrals.min_scalar
        )));
    }
    let lower = EIGHT_PI2 * (integrals.chi_hat() - 2.0);
    let scale = integrals.w_sq().max(1.0);
    Ok(GurskyCheck {
        lower,
        w_plus_sq: integrals.w_plus_sq,
        w_sq: integrals.w_sq(),
        first_holds: lower <= integrals.w_plus_sq + tol * scale,
        second_holds: integrals.w_plus_sq <= integrals.w_sq() + tol * scale,
        min_scalar: integrals.min_scalar,
    })
}

pub fn gursky_check(chart: &MetricChart, quad: &QuadratureSpec, tol: f64) -> Result<GurskyCheck> {
    gursky_from(&curvature_integrals(chart, None, quad)?, tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YamabeIntegralCheck {
    /// `int (R^2 - 12 |Ric0|^2)`, a lower bound for the squared Yamabe invariant.
    pub value: f64,
    /// `8 pi^2 chi_hat - int |W|^2`.
    pub identity_lhs: f64,
    /// `value / 24`.
    pub identity_rhs: f64,
    pub relative_error: f64,
    pub pass: bool,
}

pub fn yamabe_from(integrals: &CurvatureIntegrals, rtol: f64) -> YamabeIntegralCheck {
    let value = integrals.yamabe_integrand();
    let identity_lhs = EIGHT_PI2 * integrals.chi_hat() - integrals.w_sq();
    let identity_rhs = value / 24.0;
    let scale = identity_lhs.abs().max(identity_rhs.abs());
    let err = (identity_lhs - identity_rhs).abs();
    let relative_error = if scale > 0.0 { err / scale } else { 0.0 };
    YamabeIntegralCheck {
        value,
        identity_lhs,
        identity_rhs,
        relative_error,
        pass: relative_error <= rtol,
    }
}

pub fn yamabe_integral_check(chart: &MetricChart, quad: &QuadratureSpec, rtol: f64) -> Result<YamabeIntegralCheck> {
    Ok(yamabe_from(&curvature_integrals(chart, None, quad)?, rtol))
}

/// Scalar-curvature criterion fed with computed `int R^2` and volume.
pub fn scalar_sq_from(integrals: &CurvatureIntegrals, m: QeOrder, lambda: f64, tol: f64) -> Result<ScalarSqVerdict> {
    let input = BoundsInput {
        m,
        lambda,
        vol: integrals.vol,
        ..BoundsInput::default()
    };
    scalar_sq_criterion(integrals.scalar_sq, &input, tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscfCheck {
    /// `int <grad R, grad f>`.
    pub lhs: f64,
    /// `(2m^2/((m+3)(m+2))) lambda^2 vol (exp(f_osc (m+2)/m) - 1)`.
    pub rhs: f64,
    pub f_osc: f64,
    pub pass: bool,
}

/// Sub-level-set estimate `int <grad R, grad f> <= rhs`, with `f_osc` taken
/// over the quadrature nodes.
pub fn oscf_from(integrals: &CurvatureIntegrals, qe: &QEData, tol: f64) -> Result<OscfCheck> {
    require_m_gt_one(qe.m)?;
    let f_osc = integrals
        .f_osc()
        .ok_or_else(|| Error::InvalidParameter("integrals were computed without quasi-Einstein data".into()))?;
    let m = qe.m;
    let coef = 2.0 * m * m / ((m + 3.0) * (m + 2.0));
    let rhs = coef * qe.lambda * qe.lambda * integrals.vol * (f_osc * (m + 2.0) / m).exp_m1();
    let lhs = integrals.grad_r_dot_grad_f;
    Ok(OscfCheck {
        lhs,
        rhs,
        f_osc,
        pass: lhs <= rhs + tol * rhs.abs().max(1.0),
    })
}

pub fn oscf_integral_check(chart: &MetricChart, qe: &QEData, quad: &QuadratureSpec, tol: f64) -> Result<OscfCheck> {
    require_m_gt_one(qe.m)?;
    oscf_from(&curvature_integrals(chart, Some(qe), quad)?, qe, tol)
}

/// Integrand CSV: one row per quadrature node with the weighted volume element.
pub fn write_integrand_csv<W: std::io::Write>(chart: &MetricChart, quad: &QuadratureSpec, out: W) -> Result<()> {
    let grid = Grid::new(chart, quad)?;
    let mut wtr = csv::Writer::from_writer(out);
    let n = chart.dim();
    let mut header: Vec<String> = (0..n).map(|i| format!("x{}", i + 1)).collect();
    header.extend(
        ["dv", "R", "w_plus_sq", "w_minus_sq", "traceless_ricci_sq"]
            .iter()
            .map(|s| s.to_string()),
    );
    wtr.write_record(&header)?;
    for flat in 0..grid.len() {
        let node = grid.node(flat);
        let b = curvature(chart, &node.point)?;
        let mut row: Vec<String> = node.point.iter().map(|v| format!("{v:.12e}")).collect();
        for v in [
            node.weight * b.vol_density,
            b.scalar,
            b.norms.w_plus_sq,
            b.norms.w_minus_sq,
            b.norms.traceless_ricci_sq,
        ] {
            row.push(format!("{v:.12e}"));
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}
