use serde_json::{json, Value};

use qem::bounds::{
    d_m, diam_lower_cos, diam_lower_cosh, ht_defect_lower, ht_thresholds, mixed_osc_bound, osc_bound, volume_bound,
    yamabe_bound, BoundsInput, HtThresholds, QeOrder, VolumeBound,
};

use super::Outcome;
use crate::config::{BoundsArgs, Global};
use crate::error::CliError;
use crate::report::{num, Report, Status};

fn thresholds_json(t: &HtThresholds) -> Value {
    json!({
        "t1": num(t.t1),
        "t2": num(t.t2),
        "t3": num(t.t3),
        "x0": num(t.x0),
        "max": num(t.max()),
        "root_residual": num(t.residual),
        "bisection_iterations": t.iterations,
    })
}

pub fn run(args: &BoundsArgs, _global: &Global) -> Result<Outcome, CliError> {
    let m = args.m.ok_or_else(|| CliError::missing("--m"))?.0;
    let lambda = args.lambda.ok_or_else(|| CliError::missing("--lambda"))?;
    let c = args.c.ok_or_else(|| CliError::missing("--c"))?;
    let big_c = args.big_c.ok_or_else(|| CliError::missing("--C"))?;
    let input = BoundsInput {
        m,
        lambda,
        ric_min: c,
        ric_max: big_c,
        f_osc: args.fosc.unwrap_or(0.0),
        diameter: args.diameter.unwrap_or(0.0),
        vol: args.vol.unwrap_or(1.0),
        w2_integral: args.w2.unwrap_or(0.0),
    };
    input.check_ordering()?;
    let mut r = Report::default();

    let osc = osc_bound(m)?;
    let f_osc = input.f_osc;
    let osc_ok = f_osc <= osc;
    r.section(
        "oscillation",
        json!({
            "d_m": num(d_m(m)?),
            "osc_bound": num(osc),
            "f_osc": num(f_osc),
            "hitchin_thorpe_from_oscillation": osc_ok,
        }),
    );
    r.line(format!(
        "osc_bound({m}) = {osc:.12}; f_osc = {f_osc} {}",
        if osc_ok { "within" } else { "above" }
    ));

    r.section(
        "diameter_lower",
        json!({
            "cosine": num(diam_lower_cos(&input)?),
            "cosh": num(diam_lower_cosh(&input)?),
        }),
    );

    let strict = c < lambda && lambda < big_c;
    if strict {
        let t = ht_thresholds(&input)?;
        let mut v = thresholds_json(&t);
        if let Some(d) = args.diameter {
            v["hitchin_thorpe_from_diameter"] = json!(d <= t.max());
        }
        r.line(format!(
            "thresholds t1 = {:.12}, t2 = {:.12}, t3 = {:.12}",
            t.t1, t.t2, t.t3
        ));
        r.section("thresholds", v);
    } else {
        r.section("thresholds", Value::Null);
        r.line("thresholds: not defined unless c < lambda < C");
    }

    if let Some(d) = args.diameter {
        if c < lambda {
            let mb = mixed_osc_bound(&input)?;
            r.section(
                "mixed",
                json!({
                    "diameter": num(d),
                    "rhs": num(mb.rhs),
                    "osc_limit": num(mb.osc_limit),
                    "satisfied": mb.satisfied,
                }),
            );
        }
    }

    let defect = ht_defect_lower(&input)?;
    let yamabe = yamabe_bound(&input)?;
    let volume = match volume_bound(&input)? {
        VolumeBound::Max(v) => json!({ "max": num(v), "informative": true }),
        VolumeBound::Unconstrained => json!({ "max": Value::Null, "informative": false }),
    };
    r.section(
        "volume",
        json!({
            "bound": volume,
            "euler_defect_lower": num(defect.value),
            "parenthesis": num(defect.parenthesis),
            "below_threshold": defect.below_threshold,
            "yamabe_sq_lower": num(yamabe.value),
            "yamabe_vacuous": yamabe.vacuous,
        }),
    );

    let soliton = BoundsInput {
        m: QeOrder::Soliton,
        ..input
    };
    let mut limit = json!({ "osc_bound": num(osc_bound(QeOrder::Soliton)?) });
    if strict {
        let t = ht_thresholds(&soliton)?;
        limit["thresholds"] = thresholds_json(&t);
        if m != QeOrder::Soliton {
            r.line(format!(
                "soliton limit t1 = {:.12}, t2 = {:.12}, t3 = {:.12}",
                t.t1, t.t2, t.t3
            ));
        }
    }
    r.section("soliton_limit", limit);

    Ok(Outcome {
        report: r,
        status: Status::Pass,
    })
}
