//! Closed-form oscillation, diameter, Euler-characteristic, volume and
//! Yamabe estimates for compact four-dimensional quasi-Einstein manifolds.
//!
//! Every routine accepts the order `m` either as a finite value or as the
//! gradient-soliton limit [`QeOrder::Soliton`], in which case the analytic
//! `m -> infinity` limits are evaluated instead of the finite formulas.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// The parameter `m` of the quasi-Einstein equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QeOrder {
    Finite(f64),
    /// Formal limit `m = infinity` (gradient Ricci solitons).
    Soliton,
}

impl QeOrder {
    /// Parses a number or `inf`/`infinity`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim().to_ascii_lowercase();
        if matches!(t.as_str(), "inf" | "infinity" | "+inf" | "soliton") {
            return Ok(QeOrder::Soliton);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Parse(format!("cannot read m from `{text}`")))?;
        if v.is_infinite() && v > 0.0 {
            Ok(QeOrder::Soliton)
        } else {
            Ok(QeOrder::Finite(v))
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            QeOrder::Finite(m) => Some(m),
            QeOrder::Soliton => None,
        }
    }

    fn require_gt_one(self) -> Result<()> {
        match self {
            QeOrder::Finite(m) if !(m > 1.0) => Err(Error::InvalidParameter(format!(
                "m must exceed 1 (got {m}); at m = 1 the radicand 5 + 8/m - 12/m^2 equals 1 and every threshold degenerates"
            ))),
            _ => Ok(()),
        }
    }

    fn require_positive(self) -> Result<()> {
        match self {
            QeOrder::Finite(m) if !(m > 0.0) => Err(Error::InvalidParameter(format!("m must be > 0, got {m}"))),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for QeOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QeOrder::Finite(m) => write!(f, "{m}"),
            QeOrder::Soliton => write!(f, "inf"),
        }
    }
}

/// Scalar data feeding the closed-form estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsInput {
    pub m: QeOrder,
    pub lambda: f64,
    /// Minimum of `Ric(v, v)` over unit vectors.
    pub ric_min: f64,
    /// Maximum of `Ric(v, v)` over unit vectors.
    pub ric_max: f64,
    pub f_osc: f64,
    pub diameter: f64,
    pub vol: f64,
    /// `int |W|^2 dV`.
    pub w2_integral: f64,
}

impl Default for BoundsInput {
    fn default() -> Self {
        Self {
            m: QeOrder::Finite(2.0),
            lambda: 1.0,
            ric_min: 0.0,
            ric_max: 2.0,
            f_osc: 0.0,
            diameter: 0.0,
            vol: 1.0,
            w2_integral: 0.0,
        }
    }
}

impl BoundsInput {
    /// `c < lambda < C` is forced for non-constant potentials.
    pub fn check_ordering(&self) -> Result<()> {
        if self.f_osc > 0.0 && !(self.ric_min < self.lambda && self.lambda < self.ric_max) {
            return Err(Error::Hypothesis(format!(
                "a non-constant potential forces c < lambda < C, got c = {}, lambda = {}, C = {}",
                self.ric_min, self.lambda, self.ric_max
            )));
        }
        Ok(())
    }

    fn check_f_osc(&self) -> Result<()> {
        if !(self.f_osc >= 0.0) || !self.f_osc.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "f_osc must be finite and >= 0, got {}",
                self.f_osc
            )));
        }
        Ok(())
    }
}

/// `5 + 8/m - 12/m^2`.
fn radicand(m: f64) -> f64 {
    5.0 + 8.0 / m - 12.0 / (m * m)
}

/// `D_m = (5 + 8/m - 12/m^2)^(1/(m+2))`; equals 1 in the soliton limit.
pub fn d_m(m: QeOrder) -> Result<f64> {
    m.require_gt_one()?;
    Ok(match m {
        QeOrder::Finite(m) => (radicand(m).ln() / (m + 2.0)).exp(),
        QeOrder::Soliton => 1.0,
    })
}

/// `(m + 2) ln D_m`, finite in the soliton limit (`ln 5`).
pub fn log_d_m_scaled(m: QeOrder) -> Result<f64> {
    m.require_gt_one()?;
    Ok(match m {
        QeOrder::Finite(m) => radicand(m).ln(),
        QeOrder::Soliton => 5f64.ln(),
    })
}

/// `ln D_m = ln(5 + 8/m - 12/m^2)/(m+2)`; zero in the soliton limit.
pub fn ln_d_m(m: QeOrder) -> Result<f64> {
    m.require_gt_one()?;
    Ok(match m {
        QeOrder::Finite(m) => radicand(m).ln() / (m + 2.0),
        QeOrder::Soliton => 0.0,
    })
}

/// Largest potential oscillation for which the Hitchin-Thorpe inequality
/// follows: `(m/(m+2)) ln(5 + 8/m - 12/m^2)`, or `ln 5` for solitons.
pub fn osc_bound(m: QeOrder) -> Result<f64> {
    m.require_gt_one()?;
    Ok(match m {
        QeOrder::Finite(m) => m / (m + 2.0) * radicand(m).ln(),
        QeOrder::Soliton => 5f64.ln(),
    })
}

/// `sqrt(m/gap) * arccos(exp(-f_osc/m))`, with the soliton limit
/// `sqrt(2 f_osc / gap)`.
fn cos_profile(m: QeOrder, gap: f64, f_osc: f64) -> f64 {
    match m {
        QeOrder::Finite(m) => (m / gap).sqrt() * (-f_osc / m).exp().acos(),
        QeOrder::Soliton => (2.0 * f_osc / gap).sqrt(),
    }
}

fn cosh_profile(m: QeOrder, gap: f64, f_osc: f64) -> f64 {
    match m {
        QeOrder::Finite(m) => (m / gap).sqrt() * (f_osc / m).exp().acosh(),
        QeOrder::Soliton => (2.0 * f_osc / gap).sqrt(),
    }
}

/// Diameter lower bound from the cosine comparison:
/// `d >= sqrt(m/(lambda - c)) arccos(exp(-f_osc/m))`.
pub fn diam_lower_cos(input: &BoundsInput) -> Result<f64> {
    input.m.require_positive()?;
    input.check_f_osc()?;
    if input.f_osc == 0.0 {
        return Ok(0.0);
    }
    let gap = input.lambda - input.ric_min;
    if !(gap > 0.0) {
        return Err(Error::Hypothesis(format!(
            "non-constant potential requires lambda > c, got lambda - c = {gap}"
        )));
    }
    Ok(cos_profile(input.m, gap, input.f_osc))
}

/// Diameter lower bound from the cosh comparison:
/// `d >= sqrt(m/(C - lambda)) arccosh(exp(f_osc/m))`.
pub fn diam_lower_cosh(input: &BoundsInput) -> Result<f64> {
    input.m.require_positive()?;
    input.check_f_osc()?;
    if input.f_osc == 0.0 {
        return Ok(0.0);
    }
    let gap = input.ric_max - input.lambda;
    if !(gap > 0.0) {
        return Err(Error::Hypothesis(format!(
            "non-constant potential requires C > lambda, got C - lambda = {gap}"
        )));
    }
    Ok(cosh_profile(input.m, gap, input.f_osc))
}

/// Right-hand side of the mixed oscillation estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedBound {
    /// `cosh(sqrt((C-lambda)/m) d/2) sec(sqrt((lambda-c)/m) d/2)`, to be
    /// compared with `exp(f_osc/m)`; identically 1 in the soliton limit.
    pub rhs: f64,
    /// `m ln(rhs)`, a direct upper bound for `f_osc`; in the soliton limit
    /// it becomes `(C - c) d^2 / 8`.
    pub osc_limit: f64,
    /// Whether the supplied `f_osc` satisfies the estimate.
    pub satisfied: bool,
}

/// Mixed estimate; requires `d < pi sqrt(m/(lambda - c))`.
pub fn mixed_osc_bound(input: &BoundsInput) -> Result<MixedBound> {
    input.m.require_positive()?;
    input.check_f_osc()?;
    let kgap = input.lambda - input.ric_min;
    let hgap = input.ric_max - input.lambda;
    if !(kgap > 0.0) || hgap < 0.0 {
        return Err(Error::Hypothesis(format!(
            "mixed estimate needs c < lambda <= C, got c = {}, lambda = {}, C = {}",
            input.ric_min, input.lambda, input.ric_max
        )));
    }
    let d = input.diameter;
    if !(d >= 0.0) {
        return Err(Error::InvalidParameter(format!("diameter must be >= 0, got {d}")));
    }
    let (rhs, osc_limit) = match input.m {
        QeOrder::Finite(m) => {
            let limit = PI * (m / kgap).sqrt();
            if !(d < limit) {
                return Err(Error::Hypothesis(format!(
                    "the mixed estimate assumes d < pi sqrt(m/(lambda - c)) = {limit}, got d = {d}"
                )));
            }
            let a = (hgap / m).sqrt() * 0.5 * d;
            let b = (kgap / m).sqrt() * 0.5 * d;
            // log form keeps large cosh and the sec pole finite
            let log_rhs = log_cosh(a) - b.cos().ln();
            (log_rhs.exp(), m * log_rhs)
        }
        QeOrder::Soliton => (1.0, (hgap + kgap) * d * d / 8.0),
    };
    Ok(MixedBound {
        rhs,
        osc_limit,
        satisfied: input.f_osc <= osc_limit * (1.0 + 1e-12) + 1e-15,
    })
}

fn log_cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax + (-2.0 * ax).exp().ln_1p() - std::f64::consts::LN_2
}

/// The three diameter thresholds below which Hitchin-Thorpe holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HtThresholds {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// Root of `H(x) = D_m`, with `t3 = 2 x0`.
    pub x0: f64,
    /// `H(x0) - D_m` (zero in the soliton limit).
    pub residual: f64,
    pub iterations: usize,
}

impl HtThresholds {
    pub fn max(&self) -> f64 {
        self.t1.max(self.t2).max(self.t3)
    }
}

/// `H(x) = cosh(sqrt((C-lambda)/m) x) sec(sqrt((lambda-c)/m) x)`.
pub fn mixed_profile(m: f64, lambda: f64, c: f64, big_c: f64, x: f64) -> f64 {
    (((big_c - lambda) / m).sqrt() * x).cosh() / (((lambda - c) / m).sqrt() * x).cos()
}

pub const BISECTION_X_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;
/// Fraction of the sec-pole location used as the open right end.
pub const POLE_FRACTION: f64 = 0.999_999;

/// Bisection for an increasing function `g` with `g(lo) < 0 < g(hi)`.
/// Returns the root estimate and the iteration count.
pub fn bisect_increasing<G: Fn(f64) -> f64>(
    g: G,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo < 0.0 && ghi > 0.0) {
        return Err(Error::Numerical(format!(
            "root not bracketed: g({lo}) = {glo}, g({hi}) = {ghi}"
        )));
    }
    let mut iter = 0;
    while hi - lo > x_tol && iter < max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok((mid, iter + 1));
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
    }
    Ok((0.5 * (lo + hi), iter))
}

/// Hitchin-Thorpe diameter thresholds.
pub fn ht_thresholds(input: &BoundsInput) -> Result<HtThresholds> {
    input.m.require_gt_one()?;
    let (lambda, c, big_c) = (input.lambda, input.ric_min, input.ric_max);
    if !(c < lambda && lambda < big_c) {
        return Err(Error::Hypothesis(format!(
            "thresholds need c < lambda < C, got c = {c}, lambda = {lambda}, C = {big_c}"
        )));
    }
    match input.m {
        QeOrder::Finite(m) => {
            let dm = d_m(input.m)?;
            let t1 = (m / (lambda - c)).sqrt() * (1.0 / dm).acos();
            let t2 = (m / (big_c - lambda)).sqrt() * dm.acosh();
            let pole = FRAC_PI_2 * (m / (lambda - c)).sqrt();
            let g = |x: f64| mixed_profile(m, lambda, c, big_c, x) - dm;
            let (x0, iterations) =
                bisect_increasing(g, 0.0, POLE_FRACTION * pole, BISECTION_X_TOL, BISECTION_MAX_ITER)?;
            Ok(HtThresholds {
                t1,
                t2,
                t3: 2.0 * x0,
                x0,
                residual: g(x0),
                iterations,
            })
        }
        QeOrder::Soliton => {
            let l5 = 5f64.ln();
            let x0 = (2.0 * l5 / (big_c - c)).sqrt();
            Ok(HtThresholds {
                t1: (2.0 * l5 / (lambda - c)).sqrt(),
                t2: (2.0 * l5 / (big_c - lambda)).sqrt(),
                t3: 2.0 * x0,
                x0,
                residual: 0.0,
                iterations: 0,
            })
        }
    }
}

/// `5 + 8/m - 12/m^2 - exp(f_osc (m+2)/m)`.
pub fn volume_parenthesis(m: QeOrder, f_osc: f64) -> Result<f64> {
    m.require_gt_one()?;
    Ok(match m {
        QeOrder::Finite(m) => radicand(m) - (f_osc * (m + 2.0) / m).exp(),
        QeOrder::Soliton => 5.0 - f_osc.exp(),
    })
}

/// `m^2 / ((m-1)(m+3))`, tending to 1.
fn volume_coefficient(m: QeOrder) -> f64 {
    match m {
        QeOrder::Finite(m) => m * m / ((m - 1.0) * (m + 3.0)),
        QeOrder::Soliton => 1.0,
    }
}

/// Lower bound for `8 pi^2 chi(M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectBound {
    pub value: f64,
    pub parenthesis: f64,
    /// Set when the volume term is negative (`f_osc` above [`osc_bound`]).
    pub below_threshold: bool,
}

/// `int |W|^2 + (m^2 lambda^2/(6(m-1)(m+3))) vol (5 + 8/m - 12/m^2 - e^{f_osc (m+2)/m})`.
pub fn ht_defect_lower(input: &BoundsInput) -> Result<DefectBound> {
    input.check_f_osc()?;
    let parenthesis = volume_parenthesis(input.m, input.f_osc)?;
    let coef = volume_coefficient(input.m) * input.lambda * input.lambda / 6.0;
    Ok(DefectBound {
        value: input.w2_integral + coef * input.vol * parenthesis,
        parenthesis,
        below_threshold: parenthesis < 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolumeBound {
    /// Implied upper bound on the volume.
    Max(f64),
    /// The parenthesis is non-positive and the inequality carries no information.
    Unconstrained,
}

/// Upper volume bound `96 pi^2 / (lambda^2 coef parenthesis)` when informative.
pub fn volume_bound(input: &BoundsInput) -> Result<VolumeBound> {
    input.check_f_osc()?;
    if !(input.lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be > 0, got {}",
            input.lambda
        )));
    }
    let parenthesis = volume_parenthesis(input.m, input.f_osc)?;
    if parenthesis <= 0.0 {
        return Ok(VolumeBound::Unconstrained);
    }
    let lam2 = input.lambda * input.lambda;
    Ok(VolumeBound::Max(
        96.0 * PI * PI / (lam2 * volume_coefficient(input.m) * parenthesis),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YamabeBound {
    /// Lower bound for the squared Yamabe invariant.
    pub value: f64,
    /// The bound is negative and therefore vacuous.
    pub vacuous: bool,
}

/// `Y^2 >= (4 m^2 lambda^2/((m-1)(m+3))) (parenthesis) vol`.
pub fn yamabe_bound(input: &BoundsInput) -> Result<YamabeBound> {
    input.check_f_osc()?;
    let parenthesis = volume_parenthesis(input.m, input.f_osc)?;
    let value = 4.0 * volume_coefficient(input.m) * input.lambda * input.lambda * parenthesis * input.vol;
    Ok(YamabeBound {
        value,
        vacuous: value < 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSqVerdict {
    pub lhs: f64,
    /// `24 (m+1)/(m+2) lambda^2 vol`.
    pub threshold: f64,
    pub pass: bool,
}

/// Integral criterion `int R^2 <= 24 (m+1)/(m+2) lambda^2 vol`.
pub fn scalar_sq_criterion(r2_integral: f64, input: &BoundsInput, tol: f64) -> Result<ScalarSqVerdict> {
    input.m.require_gt_one()?;
    let factor = match input.m {
        QeOrder::Finite(m) => (m + 1.0) / (m + 2.0),
        QeOrder::Soliton => 1.0,
    };
    let threshold = 24.0 * factor * input.lambda * input.lambda * input.vol;
    Ok(ScalarSqVerdict {
        lhs: r2_integral,
        threshold,
        pass: r2_integral <= threshold + tol * threshold.abs().max(1.0),
    })
}
