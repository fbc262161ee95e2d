use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Outcome of a command: the status word decides the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// A failure the fixture is expected to produce.
    ExpectedFail,
    Fail,
}

impl Status {
    pub fn word(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::ExpectedFail => "expected-fail",
            Status::Fail => "fail",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::ExpectedFail => 0,
            Status::Fail => 2,
        }
    }
}

/// Report sections in insertion order plus the summary lines.
#[derive(Debug, Default)]
pub struct Report {
    sections: Map<String, Value>,
    pub summary: Vec<String>,
    pub diagnostics: Vec<String>,
}

impl Report {
    pub fn section(&mut self, name: &str, value: Value) {
        self.sections.insert(name.to_string(), value);
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.summary.push(text.into());
    }

    pub fn diagnose(&mut self, text: impl Into<String>) {
        self.diagnostics.push(text.into());
    }

    /// Final document with a trailing verdict section.
    pub fn finish(mut self, command: &str, config: Value, status: Status) -> (Value, Vec<String>) {
        let mut doc = Map::new();
        doc.insert("command".into(), json!(command));
        doc.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        doc.insert("config".into(), config);
        doc.append(&mut self.sections);
        doc.insert(
            "verdict".into(),
            json!({
                "status": status.word(),
                "exit_code": status.exit_code(),
                "diagnostics": self.diagnostics,
            }),
        );
        let mut doc = Value::Object(doc);
        round_floats(&mut doc);
        let mut summary = self.summary;
        for d in &self.diagnostics {
            summary.push(format!("diagnostic: {d}"));
        }
        summary.push(format!("{command}: {}", status.word()));
        (doc, summary)
    }
}

/// Round to [`SIGNIFICANT_DIGITS`]; non-finite values become strings.
pub fn num(v: f64) -> Value {
    if v.is_nan() {
        return json!("nan");
    }
    if v.is_infinite() {
        return json!(if v > 0.0 { "inf" } else { "-inf" });
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v);
    // normalise negative zero
    json!(if r == 0.0 { 0.0 } else { r })
}

pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => *v = num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

pub fn render(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

/// Open a CSV dump target.
pub fn create(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::create(path).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}
