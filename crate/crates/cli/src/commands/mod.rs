mod bounds;
mod ode;
mod topology;
mod verify;

use serde_json::{json, Value};

use qem::bounds::QeOrder;
use qem::fixtures::{build, Expected, Fixture};

use crate::config::{Command, Global, Order};
use crate::error::CliError;
use crate::report::{opt, Report, Status};

pub struct Outcome {
    pub report: Report,
    pub status: Status,
}

/// Run a command; returns the report document and the summary lines.
pub fn execute(global: &Global, command: &Command) -> Result<(Value, Vec<String>, Status), CliError> {
    let (outcome, config) = match command {
        Command::Bounds(a) => (bounds::run(a, global)?, to_value(global, a)),
        Command::Verify(a) => (verify::run(a, global)?, to_value(global, a)),
        Command::Topology(a) => (topology::run(a, global)?, to_value(global, a)),
        Command::Ode(a) => (ode::run(a, global)?, to_value(global, a)),
    };
    let (doc, summary) = outcome.report.finish(command.name(), config, outcome.status);
    Ok((doc, summary, outcome.status))
}

/// Effective configuration: global keys then the command's own.
fn to_value<T: serde::Serialize>(global: &Global, args: &T) -> Value {
    let mut v = serde_json::to_value(global).unwrap_or(Value::Null);
    if let (Some(g), Ok(Value::Object(a))) = (v.as_object_mut(), serde_json::to_value(args)) {
        g.extend(a);
        g.retain(|_, x| !x.is_null());
    }
    v
}

/// Build the fixture and apply `--m` / `--lambda` overrides.
fn load_fixture(
    spec: Result<qem::fixtures::FixtureSpec, CliError>,
    m: Option<Order>,
    lambda: Option<f64>,
) -> Result<Fixture, CliError> {
    let mut fx = build(&spec?)?;
    if let Some(Order(m)) = m {
        fx = fx.with_m(match m {
            QeOrder::Finite(v) => v,
            QeOrder::Soliton => f64::INFINITY,
        })?;
    }
    if let Some(l) = lambda {
        fx.qe = fx.qe.take().map(|q| q.with_lambda(l));
    }
    Ok(fx)
}

fn fixture_json(fx: &Fixture) -> Value {
    let e: &Expected = &fx.expected;
    json!({
        "kind": fx.spec.kind(),
        "chart": fx.chart.label(),
        "expected_fail": fx.expected_fail,
        "structure": fx.qe.as_ref().map(|q| json!({
            "m": crate::report::num(q.m),
            "lambda": crate::report::num(q.lambda),
            "constant_potential": q.is_constant(),
        })),
        "expected": {
            "chi": opt(e.chi),
            "tau": opt(e.tau),
            "vol": opt(e.vol),
            "scalar": opt(e.scalar),
            "ricci_min": opt(e.ricci_min),
            "ricci_max": opt(e.ricci_max),
            "diameter": opt(e.diameter),
            "lambda": opt(e.lambda),
            "notes": e.notes,
        },
    })
}
