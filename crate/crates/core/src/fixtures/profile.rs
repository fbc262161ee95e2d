//! Externally computed cohomogeneity-one profiles.
//!
//! File format: comma-separated, `#` comment lines, header
//! `t,<coef1>,...,<coefk>,f`. Comment lines of the form `# key: value` with
//! keys `m`, `lambda` and `provenance` are read as metadata.
//!
//! With coefficient columns `a,b,c` the profile defines the metric
//! `dt^2 + a^2 s1^2 + b^2 s2^2 + c^2 s3^2` on `(t0, T) x S^3`, where
//! `s1, s2, s3` are the left-invariant forms of `S^3 = SU(2)` in Euler
//! angles `(theta, phi, psi)`:
//!
//! ```text
//! s1 = sin(psi) dtheta - cos(psi) sin(theta) dphi
//! s2 = cos(psi) dtheta + sin(psi) sin(theta) dphi
//! s3 = dpsi + cos(theta) dphi
//! ```

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::bounds::{osc_bound, QeOrder};
use crate::error::{Error, Result};
use crate::fixtures::spline::CubicSpline;
use crate::qe::QEData;
use crate::tensor::{Interval, MetricChart};

/// Validated profile data.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedProfile {
    pub t: Vec<f64>,
    /// Metric coefficient columns in file order.
    pub coefficients: Vec<(String, Vec<f64>)>,
    pub f: Vec<f64>,
    pub m: Option<f64>,
    pub lambda: Option<f64>,
    pub provenance: Option<String>,
}

/// Comparison of the potential oscillation with the Hitchin-Thorpe oscillation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscComparison {
    pub f_osc: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<ImportedProfile> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_profile(file)
}

fn profile_err(line: usize, message: impl Into<String>) -> Error {
    Error::Profile {
        row: line,
        message: message.into(),
    }
}

fn parse_number(line: usize, col: &str, text: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| profile_err(line, format!("column `{col}`: cannot parse `{}`", text.trim())))?;
    if !v.is_finite() {
        return Err(profile_err(line, format!("column `{col}`: non-finite value")));
    }
    Ok(v)
}

/// Parse a profile; `row` in errors is the 1-based line number in the file.
pub fn read_profile<R: Read>(mut reader: R) -> Result<ImportedProfile> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut m = None;
    let mut lambda = None;
    let mut provenance = None;
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once(':') {
                match key.trim().to_ascii_lowercase().as_str() {
                    "m" => m = Some(parse_number(line, "m", value)?),
                    "lambda" => lambda = Some(parse_number(line, "lambda", value)?),
                    "provenance" => provenance = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        match &header {
            None => {
                let names: Vec<String> = trimmed.split(',').map(|s| s.trim().to_string()).collect();
                if names.len() < 3 || names[0] != "t" || names[names.len() - 1] != "f" {
                    return Err(profile_err(
                        line,
                        "header must be `t,<coefficients...>,f` with at least one coefficient",
                    ));
                }
                header = Some(names);
            }
            Some(names) => {
                let fields: Vec<&str> = trimmed.split(',').collect();
                if fields.len() != names.len() {
                    return Err(profile_err(
                        line,
                        format!("expected {} fields, found {}", names.len(), fields.len()),
                    ));
                }
                let vals = fields
                    .iter()
                    .zip(names)
                    .map(|(f, n)| parse_number(line, n, f))
                    .collect::<Result<Vec<f64>>>()?;
                rows.push((line, vals));
            }
        }
    }
    let names = header.ok_or_else(|| profile_err(0, "missing header"))?;
    if rows.len() < 2 {
        return Err(profile_err(0, "a profile needs at least two rows"));
    }
    for w in rows.windows(2) {
        if !(w[1].1[0] > w[0].1[0]) {
            return Err(profile_err(
                w[1].0,
                format!("t must increase strictly ({} after {})", w[1].1[0], w[0].1[0]),
            ));
        }
    }
    let last = rows.len() - 1;
    for (i, (line, vals)) in rows.iter().enumerate() {
        if i == 0 || i == last {
            continue;
        }
        for (c, name) in names.iter().enumerate().take(names.len() - 1).skip(1) {
            if !(vals[c] > 0.0) {
                return Err(profile_err(
                    *line,
                    format!("column `{name}` must be positive inside the interval, got {}", vals[c]),
                ));
            }
        }
    }
    let col = |c: usize| rows.iter().map(|r| r.1[c]).collect::<Vec<f64>>();
    let k = names.len();
    Ok(ImportedProfile {
        t: col(0),
        coefficients: (1..k - 1).map(|c| (names[c].clone(), col(c))).collect(),
        f: col(k - 1),
        m,
        lambda,
        provenance,
    })
}

impl ImportedProfile {
    pub fn f_osc(&self) -> f64 {
        let max = self.f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.f.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Length of the `t` interval. This is the distance between the two
    /// singular orbits along a normal geodesic, used as a stand-in for the
    /// diameter; it is not a certified diameter.
    pub fn diameter_proxy(&self) -> f64 {
        self.t[self.t.len() - 1] - self.t[0]
    }

    /// `f_osc <= osc_bound(m)` with a relative slack of `1e-12`.
    pub fn osc_comparison(&self, m: QeOrder) -> Result<OscComparison> {
        let bound = osc_bound(m)?;
        let f_osc = self.f_osc();
        Ok(OscComparison {
            f_osc,
            bound,
            pass: f_osc <= bound * (1.0 + 1e-12),
        })
    }

    fn coefficient(&self, name: &str) -> Option<&[f64]> {
        self.coefficients
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Chart on `(t, theta, phi, psi)` for profiles with coefficients `a,b,c`.
    pub fn chart(&self) -> Result<MetricChart> {
        let names: Vec<&str> = self.coefficients.iter().map(|(n, _)| n.as_str()).collect();
        if names != ["a", "b", "c"] {
            return Err(Error::InvalidParameter(format!(
                "a metric chart needs coefficient columns a,b,c, found {}",
                names.join(",")
            )));
        }
        let spline = |name: &str| -> Result<CubicSpline> {
            CubicSpline::natural(self.t.clone(), self.coefficient(name).unwrap_or_default().to_vec())
        };
        let (a, b, c) = (Arc::new(spline("a")?), Arc::new(spline("b")?), Arc::new(spline("c")?));
        let (t0, t1) = (self.t[0], self.t[self.t.len() - 1]);
        let domain = vec![
            Interval::new(t0, t1),
            Interval::new(0.0, PI),
            Interval::new(0.0, 2.0 * PI),
            Interval::new(0.0, 4.0 * PI),
        ];
        MetricChart::new("imported-profile", domain, move |p| {
            let (ta, tb, tc) = (a.eval(p[0]).0, b.eval(p[0]).0, c.eval(p[0]).0);
            cohomogeneity_one_metric(ta, tb, tc, p[1], p[3])
        })
    }

    /// Structure with the spline-interpolated potential `f(t)`.
    pub fn qe_data(&self, m: Option<f64>, lambda: Option<f64>) -> Result<QEData> {
        let m = m
            .or(self.m)
            .ok_or_else(|| Error::InvalidParameter("profile has no `# m:` entry and none was given".into()))?;
        let lambda = lambda
            .or(self.lambda)
            .ok_or_else(|| Error::InvalidParameter("profile has no `# lambda:` entry and none was given".into()))?;
        let f = Arc::new(CubicSpline::natural(self.t.clone(), self.f.clone())?);
        let fd = f.clone();
        Ok(
            QEData::new(4, m, lambda, move |p| f.eval(p[0]).0)?.with_derivatives(move |p| {
                let (_, d1, d2) = fd.eval(p[0]);
                let mut h = DMatrix::zeros(4, 4);
                h[(0, 0)] = d2;
                (vec![d1, 0.0, 0.0, 0.0], h)
            }),
        )
    }
}

/// Metric components of `dt^2 + a^2 s1^2 + b^2 s2^2 + c^2 s3^2` in
/// coordinates `(t, theta, phi, psi)`.
pub fn cohomogeneity_one_metric(a: f64, b: f64, c: f64, theta: f64, psi: f64) -> DMatrix<f64> {
    let (a2, b2, c2) = (a * a, b * b, c * c);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    let mut g = DMatrix::zeros(4, 4);
    g[(0, 0)] = 1.0;
    g[(1, 1)] = a2 * sp * sp + b2 * cp * cp;
    g[(2, 2)] = (a2 * cp * cp + b2 * sp * sp) * st * st + c2 * ct * ct;
    g[(3, 3)] = c2;
    let g12 = (b2 - a2) * sp * cp * st;
    g[(1, 2)] = g12;
    g[(2, 1)] = g12;
    g[(2, 3)] = c2 * ct;
    g[(3, 2)] = c2 * ct;
    g
}

/// Write a profile in the import format.
pub fn write_profile<W: std::io::Write>(profile: &ImportedProfile, mut out: W) -> Result<()> {
    if let Some(m) = profile.m {
        writeln!(out, "# m: {m}")?;
    }
    if let Some(l) = profile.lambda {
        writeln!(out, "# lambda: {l}")?;
    }
    if let Some(p) = &profile.provenance {
        writeln!(out, "# provenance: {p}")?;
    }
    let names: Vec<&str> = profile.coefficients.iter().map(|(n, _)| n.as_str()).collect();
    writeln!(out, "t,{},f", names.join(","))?;
    for i in 0..profile.t.len() {
        let mut row = vec![format!("{:e}", profile.t[i])];
        row.extend(profile.coefficients.iter().map(|(_, v)| format!("{:e}", v[i])));
        row.push(format!("{:e}", profile.f[i]));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
