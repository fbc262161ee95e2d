use serde_json::{json, Map, Value};

use qem::qe::{residual_summary, scalar_bound_check, write_residual_csv, Stat};
use qem::tensor::{ricci_extremes, Sampler};
use qem::Error;

use super::{fixture_json, load_fixture, Outcome};
use crate::config::{Global, VerifyArgs};
use crate::error::CliError;
use crate::report::{create, num, Report, Status};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_POINTS: usize = 100;

pub const FLAT_DIAGNOSTIC: &str = "λ > 0 requires nonzero Ricci";

pub fn run(args: &VerifyArgs, global: &Global) -> Result<Outcome, CliError> {
    let fx = load_fixture(args.spec(), args.m, args.lambda)?;
    let tol = global.tol.unwrap_or(DEFAULT_TOL);
    let qe = fx.qe.as_ref().ok_or_else(|| {
        Error::InvalidParameter(format!(
            "fixture {} carries no quasi-Einstein structure",
            fx.spec.kind()
        ))
    })?;
    let count = args.points.unwrap_or(DEFAULT_POINTS);
    let seed = global.seed.unwrap_or(0);
    let points = Sampler::Random { count, seed }.points(&fx.chart);
    let sample = Sampler::Points(points.clone());

    let mut r = Report::default();
    r.section("fixture", fixture_json(&fx));
    r.section("sampling", json!({ "points": count, "seed": seed }));

    let s = residual_summary(&fx.chart, qe, &points)?;
    let mut rows: Vec<(&str, Stat)> = vec![("qe_residual", s.qe_norm), ("trace", s.trace)];
    // the scalar-curvature identities carry factors of 1/m and (m+2)/(m-1)
    if qe.m.is_finite() {
        for (name, st) in [
            ("scalar_identity_r1", s.r1),
            ("scalar_identity_r2", s.r2),
            ("scalar_identity_r3", s.r3),
        ] {
            if let Some(st) = st {
                rows.push((name, st));
            }
        }
    }
    rows.push(("u_identity", s.u_identity));
    let mut all_pass = true;
    let mut residuals = Map::new();
    for (name, st) in rows {
        let pass = st.max <= tol;
        all_pass &= pass;
        residuals.insert(
            name.into(),
            json!({ "max": num(st.max), "mean": num(st.mean), "pass": pass }),
        );
        r.line(format!(
            "{name:<18} max {:.3e} mean {:.3e} {}",
            st.max,
            st.mean,
            if pass { "pass" } else { "FAIL" }
        ));
    }
    r.section("residuals", Value::Object(residuals));

    if qe.lambda > 0.0 && qe.m > 1.0 {
        let sb = scalar_bound_check(&fx.chart, qe, &sample)?;
        all_pass &= sb.pass;
        r.line(format!(
            "scalar bound: min R {:.6} vs {:.6} {}",
            sb.min_scalar,
            sb.threshold,
            if sb.pass { "pass" } else { "FAIL" }
        ));
        r.section(
            "scalar_bound",
            json!({
                "min_scalar": num(sb.min_scalar),
                "threshold": num(sb.threshold),
                "witness": sb.witness.iter().map(|v| num(*v)).collect::<Vec<_>>(),
                "pass": sb.pass,
            }),
        );
    }

    let ric = ricci_extremes(&fx.chart, &sample)?;
    r.section("ricci", json!({ "min": num(ric.min), "max": num(ric.max) }));
    if qe.lambda > 0.0 && ric.min.abs().max(ric.max.abs()) <= tol {
        all_pass = false;
        r.diagnose(FLAT_DIAGNOSTIC);
    }

    if let Some(path) = &args.csv {
        write_residual_csv(&fx.chart, qe, &points, create(path)?)?;
    }

    let status = match (all_pass, fx.expected_fail) {
        (true, false) => Status::Pass,
        (false, true) => Status::ExpectedFail,
        (true, true) => {
            r.diagnose("the fixture is expected to fail but every residual is within tolerance");
            Status::Fail
        }
        (false, false) => Status::Fail,
    };
    Ok(Outcome { report: r, status })
}
