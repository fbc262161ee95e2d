use serde_json::{json, Value};

use qem::bounds::QeOrder;
use qem::comparison::{
    cosh_envelope, cosh_envelope_check, cosine_envelope, cosine_envelope_check, integrate_u, midpoint_split_check,
    synthetic_profile, wronskian_monotonicity, CheckStatus, ComparisonParams, EnvelopeCheck, GeodesicProfile,
    SyntheticRic, USolution,
};
use qem::Error;

use super::Outcome;
use crate::config::{Global, OdeArgs};
use crate::error::CliError;
use crate::report::{create, num, Report, Status};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_INTERVALS: usize = 200;
/// Largest end slope of `f` accepted as a critical point.
pub const SLOPE_TOL: f64 = 1e-3;

fn status_word(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "fail",
        CheckStatus::HypothesisViolated => "hypothesis-violated",
        CheckStatus::Skipped => "skipped",
    }
}

fn envelope_json(check: &Result<EnvelopeCheck, Error>) -> Value {
    match check {
        Ok(c) => json!({
            "status": status_word(c.status),
            "margin": num(c.margin),
            "end_margin": num(c.end_margin),
            "note": c.note,
        }),
        Err(e) => json!({ "status": "skipped", "note": e.to_string() }),
    }
}

fn profile(args: &OdeArgs, lambda: f64) -> Result<GeodesicProfile, CliError> {
    if let Some(path) = &args.profile {
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        return Ok(GeodesicProfile::read_csv(file)?);
    }
    let ric = args.ric.unwrap_or(lambda);
    let shape = match args.shape.as_deref().unwrap_or("constant") {
        "constant" => SyntheticRic::Constant(ric),
        "linear" => SyntheticRic::Linear(ric, args.ric_end.unwrap_or(ric)),
        "oscillating" => SyntheticRic::Oscillating {
            mid: ric,
            amp: args.amp.unwrap_or(0.0),
            periods: args.periods.unwrap_or(1.0),
        },
        other => {
            return Err(CliError::Usage(format!(
                "unknown shape `{other}`; expected constant, linear or oscillating"
            )))
        }
    };
    Ok(synthetic_profile(
        shape,
        args.length.unwrap_or(1.0),
        args.intervals.unwrap_or(DEFAULT_INTERVALS),
    )?)
}

pub fn run(args: &OdeArgs, global: &Global) -> Result<Outcome, CliError> {
    let m = match args.m.ok_or_else(|| CliError::missing("--m"))?.0 {
        QeOrder::Finite(m) => m,
        QeOrder::Soliton => return Err(Error::InvalidParameter("the comparison ODE needs a finite m".into()).into()),
    };
    let lambda = args.lambda.ok_or_else(|| CliError::missing("--lambda"))?;
    let tol = global.tol.unwrap_or(DEFAULT_TOL);
    let profile = profile(args, lambda)?;
    let (lo, hi) = profile.ric_range();
    let params = ComparisonParams {
        m,
        lambda,
        ric_min: args.c.unwrap_or(lo),
        ric_max: args.big_c.unwrap_or(hi),
    };
    params.validate()?;
    let sol = integrate_u(&profile, m, lambda, 1.0)?;

    let mut r = Report::default();
    r.section(
        "profile",
        json!({
            "samples": profile.len(),
            "length": num(profile.length()),
            "ric_min": num(lo),
            "ric_max": num(hi),
            "has_potential": profile.f().is_some(),
        }),
    );
    r.section(
        "parameters",
        json!({
            "m": num(m),
            "lambda": num(lambda),
            "c": num(params.ric_min),
            "C": num(params.ric_max),
            "K": num(params.k()),
            "H": num(params.h()),
        }),
    );
    let u_end = sol.u[sol.u.len() - 1];
    r.section(
        "solution",
        json!({
            "u_end": num(u_end),
            "du_end": num(sol.du[sol.du.len() - 1]),
            "u_min": num(sol.u.iter().copied().fold(f64::INFINITY, f64::min)),
        }),
    );

    let mut pass = true;
    let cos = cosine_envelope_check(&profile, &sol, &params, tol);
    let cosh = cosh_envelope_check(&profile, &sol, &params, tol);
    for (name, c) in [("cosine", &cos), ("cosh", &cosh)] {
        if let Ok(c) = c {
            match c.status {
                CheckStatus::Fail => pass = false,
                CheckStatus::HypothesisViolated => {
                    pass = false;
                    r.diagnose(format!(
                        "{name} envelope: {}",
                        c.note.as_deref().unwrap_or("hypothesis violated")
                    ));
                }
                _ => {}
            }
            r.line(format!(
                "{name} envelope: {} (margin {:.3e})",
                status_word(c.status),
                c.margin
            ));
        } else {
            r.line(format!("{name} envelope: skipped"));
        }
    }
    r.section("cosine_envelope", envelope_json(&cos));
    r.section("cosh_envelope", envelope_json(&cosh));

    let ran = |c: &Result<EnvelopeCheck, Error>| {
        matches!(
            c,
            Ok(EnvelopeCheck {
                status: CheckStatus::Pass | CheckStatus::Fail,
                ..
            })
        )
    };
    let mut wronskian = json!({});
    if ran(&cos) {
        let (v, dv) = cosine_envelope(&sol, params.k());
        let w = wronskian_monotonicity(&sol, &v, &dv, tol)?;
        pass &= w.pass;
        wronskian["cosine"] = json!({ "pass": w.pass, "min_increment": num(w.min_increment) });
    }
    if ran(&cosh) {
        // with the envelope first the Wronskian is increasing
        let (v, dv) = cosh_envelope(&sol, params.h());
        let env = USolution {
            s: sol.s.clone(),
            u: v,
            du: dv,
        };
        let w = wronskian_monotonicity(&env, &sol.u, &sol.du, tol)?;
        pass &= w.pass;
        wronskian["cosh"] = json!({ "pass": w.pass, "min_increment": num(w.min_increment) });
    }
    r.section("wronskian", wronskian);

    let (with_f, derived) = match profile.f() {
        Some(_) => (profile.clone(), false),
        None => (profile.clone().with_potential(sol.potential(m))?, true),
    };
    let split = match midpoint_split_check(&with_f, &params, tol, SLOPE_TOL) {
        Ok(s) => {
            // the splitting argument needs critical points at both ends
            if s.endpoints_critical {
                pass &= s.pass;
            }
            json!({
                "potential": if derived { "from u" } else { "profile" },
                "half1": [num(s.half1.0), num(s.half1.1)],
                "half2": [num(s.half2.0), num(s.half2.1)],
                "product": [num(s.product.0), num(s.product.1)],
                "endpoints_critical": s.endpoints_critical,
                "pass": s.pass,
            })
        }
        Err(e) => json!({ "skipped": e.to_string() }),
    };
    r.section("midpoint_split", split);

    if let Some(path) = &args.csv {
        write_csv(path, &profile, &sol, &params)?;
    }
    let status = if pass { Status::Pass } else { Status::Fail };
    Ok(Outcome { report: r, status })
}

fn write_csv(
    path: &std::path::Path,
    profile: &GeodesicProfile,
    sol: &USolution,
    params: &ComparisonParams,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let out = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(["s", "ric", "u", "du", "cosine", "cosh"]).map_err(out)?;
    let nan = vec![f64::NAN; sol.u.len()];
    let cos = if params.k() > 0.0 {
        cosine_envelope(sol, params.k()).0
    } else {
        nan.clone()
    };
    let cosh = if params.h() >= 0.0 {
        cosh_envelope(sol, params.h()).0
    } else {
        nan
    };
    for i in 0..sol.u.len() {
        let row = [sol.s[i], profile.ric()[i], sol.u[i], sol.du[i], cos[i], cosh[i]];
        w.write_record(row.iter().map(|v| format!("{v:.12e}"))).map_err(out)?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}
