//! Comparison machinery for the potential along a unit-speed geodesic.
//!
//! Along a geodesic, `u(s) = exp(-f(gamma(s))/m)` solves
//! `u'' + ((lambda - Ric(gamma', gamma'))/m) u = 0`. With `c <= Ric <= C`
//! this is compared against `u(0) cos(sqrt(K) s)` (`K = (lambda - c)/m`)
//! from below and `u(0) cosh(sqrt(H) s)` (`H = (C - lambda)/m`) from above.
//! Checks report margins as well as verdicts; hypothesis violations gate a
//! check instead of failing it.

use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Samples of `Ric(gamma', gamma')` (and optionally `f o gamma`) along a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicProfile {
    s: Vec<f64>,
    ric: Vec<f64>,
    f: Option<Vec<f64>>,
}

impl GeodesicProfile {
    pub fn new(s: Vec<f64>, ric: Vec<f64>, f: Option<Vec<f64>>) -> Result<Self> {
        if s.len() < 2 {
            return Err(Error::Profile {
                row: s.len(),
                message: "a profile needs at least two samples".into(),
            });
        }
        if ric.len() != s.len() || f.as_ref().is_some_and(|f| f.len() != s.len()) {
            return Err(Error::Profile {
                row: ric.len().min(s.len()),
                message: "column lengths differ".into(),
            });
        }
        if s[0] != 0.0 {
            return Err(Error::Profile {
                row: 0,
                message: format!("arclength must start at 0, found {}", s[0]),
            });
        }
        for (i, w) in s.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::Profile {
                    row: i + 1,
                    message: format!("arclength not strictly increasing ({} then {})", w[0], w[1]),
                });
            }
        }
        let finite = |v: &[f64]| v.iter().position(|x| !x.is_finite());
        if let Some(i) = finite(&s).or_else(|| finite(&ric)) {
            return Err(Error::Profile {
                row: i,
                message: "non-finite value".into(),
            });
        }
        if let Some(i) = f.as_deref().and_then(finite) {
            return Err(Error::Profile {
                row: i,
                message: "non-finite potential value".into(),
            });
        }
        Ok(Self { s, ric, f })
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn ric(&self) -> &[f64] {
        &self.ric
    }

    pub fn f(&self) -> Option<&[f64]> {
        self.f.as_deref()
    }

    pub fn length(&self) -> f64 {
        *self.s.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn with_potential(mut self, f: Vec<f64>) -> Result<Self> {
        if f.len() != self.s.len() {
            return Err(Error::Profile {
                row: f.len(),
                message: "potential column length differs".into(),
            });
        }
        self.f = Some(f);
        Ok(self)
    }

    /// Same curve traversed from the far end.
    pub fn reversed(&self) -> Self {
        let l = self.length();
        let s = self.s.iter().rev().map(|v| l - v).collect();
        let ric = self.ric.iter().rev().copied().collect();
        let f = self.f.as_ref().map(|f| f.iter().rev().copied().collect());
        Self { s, ric, f }
    }

    pub fn ric_range(&self) -> (f64, f64) {
        self.ric
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                (lo.min(r), hi.max(r))
            })
    }

    /// Read a profile from CSV with header `s,ric` or `s,ric,f`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let has_f = match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["s", "ric"] => false,
            ["s", "ric", "f"] => true,
            _ => {
                return Err(Error::Parse(format!(
                    "profile header must be `s,ric` or `s,ric,f`, found `{}`",
                    headers.join(",")
                )))
            }
        };
        let (mut s, mut ric, mut f) = (Vec::new(), Vec::new(), Vec::new());
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Profile {
                        row: row + 1,
                        message: format!("missing column {}", headers[i]),
                    })?
                    .parse::<f64>()
                    .map_err(|e| Error::Profile {
                        row: row + 1,
                        message: format!("column {}: {e}", headers[i]),
                    })
            };
            s.push(field(0)?);
            ric.push(field(1)?);
            if has_f {
                f.push(field(2)?);
            }
        }
        // data rows are numbered from 1 in diagnostics
        Self::new(s, ric, has_f.then_some(f)).map_err(|e| match e {
            Error::Profile { row, message } => Error::Profile { row: row + 1, message },
            other => other,
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        match &self.f {
            Some(_) => wtr.write_record(["s", "ric", "f"])?,
            None => wtr.write_record(["s", "ric"])?,
        }
        for i in 0..self.s.len() {
            let mut row = vec![format!("{:.17e}", self.s[i]), format!("{:.17e}", self.ric[i])];
            if let Some(f) = &self.f {
                row.push(format!("{:.17e}", f[i]));
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Shapes for synthetic Ricci profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticRic {
    Constant(f64),
    /// Linear ramp from the first value at `s = 0` to the second at `s = L`.
    Linear(f64, f64),
    /// `mid + amp * sin(2 pi periods s / L)`.
    Oscillating {
        mid: f64,
        amp: f64,
        periods: f64,
    },
}

pub fn synthetic_profile(shape: SyntheticRic, length: f64, intervals: usize) -> Result<GeodesicProfile> {
    if !(length > 0.0) || intervals == 0 {
        return Err(Error::InvalidParameter(
            "synthetic profile needs length > 0 and at least one interval".into(),
        ));
    }
    let s: Vec<f64> = (0..=intervals).map(|i| length * i as f64 / intervals as f64).collect();
    let ric = s
        .iter()
        .map(|&x| match shape {
            SyntheticRic::Constant(v) => v,
            SyntheticRic::Linear(a, b) => a + (b - a) * x / length,
            SyntheticRic::Oscillating { mid, amp, periods } => {
                mid + amp * (std::f64::consts::TAU * periods * x / length).sin()
            }
        })
        .collect();
    GeodesicProfile::new(s, ric, None)
}

/// Curvature data entering the comparison estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonParams {
    pub m: f64,
    pub lambda: f64,
    /// Lower Ricci bound `c`.
    pub ric_min: f64,
    /// Upper Ricci bound `C`.
    pub ric_max: f64,
}

impl ComparisonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) {
            return Err(Error::InvalidParameter(format!("m must be > 0, got {}", self.m)));
        }
        Ok(())
    }

    /// `K = (lambda - c) / m`.
    pub fn k(&self) -> f64 {
        (self.lambda - self.ric_min) / self.m
    }

    /// `H = (C - lambda) / m`.
    pub fn h(&self) -> f64 {
        (self.ric_max - self.lambda) / self.m
    }
}

/// Samples of `u` and `u'` at the profile's arclength nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct USolution {
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

pub const DEFAULT_SUBSTEPS: usize = 10;

/// Integrate `u'' + ((lambda - ric(s))/m) u = 0`, `u(0) = u0`, `u'(0) = 0`,
/// with `ric` piecewise linear between samples, using classical RK4 with
/// [`DEFAULT_SUBSTEPS`] steps per sample interval.
pub fn integrate_u(profile: &GeodesicProfile, m: f64, lambda: f64, u0: f64) -> Result<USolution> {
    integrate_u_with(profile, m, lambda, u0, 0.0, DEFAULT_SUBSTEPS)
}

/// General initial-value version of [`integrate_u`] with explicit `u'(0)`
/// and substep count.
pub fn integrate_u_with(
    profile: &GeodesicProfile,
    m: f64,
    lambda: f64,
    u0: f64,
    du0: f64,
    substeps: usize,
) -> Result<USolution> {
    if !(m > 0.0) {
        return Err(Error::InvalidParameter(format!("m must be > 0, got {m}")));
    }
    if !(u0 > 0.0) {
        return Err(Error::InvalidParameter(format!("u0 must be > 0, got {u0}")));
    }
    if substeps == 0 {
        return Err(Error::InvalidParameter("substeps must be >= 1".into()));
    }
    let s = profile.s();
    let ric = profile.ric();
    let mut u = vec![u0];
    let mut du = vec![du0];
    let (mut y, mut dy) = (u0, du0);
    for i in 0..s.len() - 1 {
        let (s0, s1) = (s[i], s[i + 1]);
        let (r0, r1) = (ric[i], ric[i + 1]);
        let coef = |x: f64| {
            let t = (x - s0) / (s1 - s0);
            (lambda - (r0 + (r1 - r0) * t)) / m
        };
        let h = (s1 - s0) / substeps as f64;
        for k in 0..substeps {
            let x = s0 + k as f64 * h;
            let f = |x: f64, y: f64, _dy: f64| -coef(x) * y;
            let k1y = dy;
            let k1v = f(x, y, dy);
            let k2y = dy + 0.5 * h * k1v;
            let k2v = f(x + 0.5 * h, y + 0.5 * h * k1y, k2y);
            let k3y = dy + 0.5 * h * k2v;
            let k3v = f(x + 0.5 * h, y + 0.5 * h * k2y, k3y);
            let k4y = dy + h * k3v;
            let k4v = f(x + h, y + h * k3y, k4y);
            y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            dy += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        u.push(y);
        du.push(dy);
    }
    Ok(USolution { s: s.to_vec(), u, du })
}

impl USolution {
    /// Potential recovered as `f = -m ln u`.
    pub fn potential(&self, m: f64) -> Vec<f64> {
        self.u.iter().map(|u| -m * u.ln()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The profile leaves the curvature range the estimate assumes.
    HypothesisViolated,
    /// Outside the working regime of the estimate; nothing to check.
    Skipped,
}

/// Outcome of an envelope comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCheck {
    pub status: CheckStatus,
    /// `min(u - v)` for the cosine envelope, `min(v - u)` for the cosh envelope.
    pub margin: f64,
    /// Margin at the last sample.
    pub end_margin: f64,
    pub note: Option<String>,
}

impl EnvelopeCheck {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

/// Default absolute tolerance on the `u` scale with `u(0) = 1`.
pub const DEFAULT_TOL: f64 = 1e-7;

/// `v = u(0) cos(sqrt(K) s)` and its derivative on the solution grid.
pub fn cosine_envelope(sol: &USolution, k: f64) -> (Vec<f64>, Vec<f64>) {
    let u0 = sol.u[0];
    let r = k.sqrt();
    sol.s
        .iter()
        .map(|&s| (u0 * (r * s).cos(), -u0 * r * (r * s).sin()))
        .unzip()
}

/// `v = u(0) cosh(sqrt(H) s)` and its derivative on the solution grid.
pub fn cosh_envelope(sol: &USolution, h: f64) -> (Vec<f64>, Vec<f64>) {
    let u0 = sol.u[0];
    let r = h.sqrt();
    sol.s
        .iter()
        .map(|&s| (u0 * (r * s).cosh(), u0 * r * (r * s).sinh()))
        .unzip()
}

fn envelope_margins(diff: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut last = 0.0;
    for d in diff {
        min = min.min(d);
        last = d;
    }
    (min, last)
}

/// Lower comparison `u(s) >= u(0) cos(sqrt(K) s)` on `[0, L]`.
pub fn cosine_envelope_check(
    profile: &GeodesicProfile,
    sol: &USolution,
    params: &ComparisonParams,
    tol: f64,
) -> Result<EnvelopeCheck> {
    params.validate()?;
    let k = params.k();
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cosine comparison needs lambda > c (K = {k})"
        )));
    }
    let (lo, _) = profile.ric_range();
    if lo < params.ric_min - tol {
        return Ok(EnvelopeCheck {
            status: CheckStatus::HypothesisViolated,
            margin: f64::NAN,
            end_margin: f64::NAN,
            note: Some(format!("profile Ricci minimum {lo} is below c = {}", params.ric_min)),
        });
    }
    let limit = FRAC_PI_2 / k.sqrt();
    if profile.length() >= limit {
        return Ok(EnvelopeCheck {
            status: CheckStatus::Skipped,
            margin: f64::NAN,
            end_margin: f64::NAN,
            note: Some(format!(
                "length {} reaches pi/(2 sqrt K) = {limit}; the estimate holds trivially there",
                profile.length()
            )),
        });
    }
    let (v, _) = cosine_envelope(sol, k);
    let (margin, end_margin) = envelope_margins(sol.u.iter().zip(&v).map(|(u, v)| u - v));
    Ok(EnvelopeCheck {
        status: if margin >= -tol {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        margin,
        end_margin,
        note: None,
    })
}

/// Upper comparison `u(s) <= u(0) cosh(sqrt(H) s)`.
pub fn cosh_envelope_check(
    profile: &GeodesicProfile,
    sol: &USolution,
    params: &ComparisonParams,
    tol: f64,
) -> Result<EnvelopeCheck> {
    params.validate()?;
    let h = params.h();
    if !(h >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cosh comparison needs C >= lambda (H = {h})"
        )));
    }
    let (_, hi) = profile.ric_range();
    if hi > params.ric_max + tol {
        return Ok(EnvelopeCheck {
            status: CheckStatus::HypothesisViolated,
            margin: f64::NAN,
            end_margin: f64::NAN,
            note: Some(format!("profile Ricci maximum {hi} exceeds C = {}", params.ric_max)),
        });
    }
    let (v, _) = cosh_envelope(sol, h);
    let (margin, end_margin) = envelope_margins(sol.u.iter().zip(&v).map(|(u, v)| v - u));
    Ok(EnvelopeCheck {
        status: if margin >= -tol {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        margin,
        end_margin,
        note: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WronskianCheck {
    pub pass: bool,
    /// `v^2 (u/v)' = u' v - u v'` at every node.
    pub values: Vec<f64>,
    /// Smallest forward difference of `values`.
    pub min_increment: f64,
}

/// Monotonicity of `v^2 (u/v)'` along the grid.
pub fn wronskian_monotonicity(sol: &USolution, v: &[f64], dv: &[f64], tol: f64) -> Result<WronskianCheck> {
    if v.len() != sol.u.len() || dv.len() != sol.u.len() {
        return Err(Error::Dimension {
            expected: sol.u.len(),
            got: v.len().min(dv.len()),
        });
    }
    if let Some(i) = v.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Hypothesis(format!(
            "comparison function vanishes at s = {}",
            sol.s[i]
        )));
    }
    let values: Vec<f64> = (0..v.len()).map(|i| sol.du[i] * v[i] - sol.u[i] * dv[i]).collect();
    let min_increment = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    Ok(WronskianCheck {
        pass: min_increment >= -tol,
        values,
        min_increment,
    })
}

/// Both halves of the midpoint splitting and their product.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointCheck {
    /// `exp((f(x) - f(p))/m)` and `sec(sqrt((lambda - c)/m) L/2)`.
    pub half1: (f64, f64),
    /// `exp((f(q) - f(x))/m)` and `cosh(sqrt((C - lambda)/m) L/2)`.
    pub half2: (f64, f64),
    /// `exp((f(q) - f(p))/m)` against the product bound.
    pub product: (f64, f64),
    /// Whether `f' = 0` holds (to tolerance) at both ends.
    pub endpoints_critical: bool,
    pub pass: bool,
}

fn interpolate(s: &[f64], y: &[f64], x: f64) -> f64 {
    let i = s.partition_point(|&v| v <= x).clamp(1, s.len() - 1);
    let t = (x - s[i - 1]) / (s[i] - s[i - 1]);
    y[i - 1] + (y[i] - y[i - 1]) * t
}

fn end_slope(s: &[f64], f: &[f64], at_start: bool) -> f64 {
    let n = s.len();
    if n < 3 {
        return if at_start {
            (f[1] - f[0]) / (s[1] - s[0])
        } else {
            (f[n - 1] - f[n - 2]) / (s[n - 1] - s[n - 2])
        };
    }
    // second-order one-sided difference, assuming near-uniform spacing
    if at_start {
        let h = s[1] - s[0];
        (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    } else {
        let h = s[n - 1] - s[n - 2];
        (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
    }
}

/// Split the profile (from a minimum `p` of `f` to a maximum `q`) at its
/// midpoint and compare each half against its envelope.
pub fn midpoint_split_check(
    profile: &GeodesicProfile,
    params: &ComparisonParams,
    tol: f64,
    slope_tol: f64,
) -> Result<MidpointCheck> {
    params.validate()?;
    let f = profile
        .f()
        .ok_or_else(|| Error::InvalidParameter("midpoint split needs potential samples".into()))?;
    let m = params.m;
    let kk = params.k();
    let hh = params.h();
    if !(kk > 0.0) || hh < 0.0 {
        return Err(Error::Hypothesis(format!("need c < lambda <= C (K = {kk}, H = {hh})")));
    }
    let l = profile.length();
    let half = 0.5 * l;
    let limit = FRAC_PI_2 * (m / (params.lambda - params.ric_min)).sqrt();
    if !(half < limit) {
        return Err(Error::Hypothesis(format!(
            "half length {half} must be below (pi/2) sqrt(m/(lambda - c)) = {limit}"
        )));
    }
    let s = profile.s();
    let fp = f[0];
    let fq = f[f.len() - 1];
    let fx = interpolate(s, f, half);
    let sec = 1.0 / (kk.sqrt() * half).cos();
    let ch = (hh.sqrt() * half).cosh();
    let half1 = (((fx - fp) / m).exp(), sec);
    let half2 = (((fq - fx) / m).exp(), ch);
    let product = (((fq - fp) / m).exp(), sec * ch);
    let endpoints_critical = end_slope(s, f, true).abs() <= slope_tol && end_slope(s, f, false).abs() <= slope_tol;
    let pass = half1.0 <= half1.1 + tol && half2.0 <= half2.1 + tol && product.0 <= product.1 + tol;
    Ok(MidpointCheck {
        half1,
        half2,
        product,
        endpoints_critical,
        pass,
    })
}
