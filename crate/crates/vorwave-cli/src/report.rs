//! Deterministic CSV and JSON emission.  Numbers print in their shortest
//! round-trip decimal form, JSON keys serialize sorted, so identical
//! configurations produce byte-identical artifacts.

use serde_json::{json, Map, Value};
use std::collections::BTreeMap;

/// Shortest round-trip decimal representation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x}")
    }
}

/// JSON value for possibly-infinite scalars (JSON has no infinities).
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(fmt_f64(x))
    }
}

#[derive(Debug, Clone)]
pub struct Csv {
    pub filename: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(filename: &str, header: Vec<&'static str>) -> Self {
        Self { filename: filename.to_string(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Assembles the versioned report envelope.
pub fn report(
    command: &str,
    echo: &BTreeMap<String, BTreeMap<String, String>>,
    flags: Value,
    results: Value,
) -> Value {
    report_with_tolerances(command, echo, flags, results, None)
}

/// Report envelope carrying the effective tolerance knobs.
pub fn report_with_tolerances(
    command: &str,
    echo: &BTreeMap<String, BTreeMap<String, String>>,
    flags: Value,
    results: Value,
    tolerances: Option<(f64, f64, f64)>,
) -> Value {
    let mut config = Map::new();
    for (section, kv) in echo {
        let mut sec = Map::new();
        for (k, v) in kv {
            sec.insert(k.clone(), json!(v));
        }
        config.insert(section.clone(), Value::Object(sec));
    }
    let mut envelope = json!({
        "schema": "vorwave-report/1",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": Value::Object(config),
        "flags": flags,
        "results": results,
    });
    if let Some((ode, quad, root)) = tolerances {
        envelope.as_object_mut().unwrap().insert(
            "tolerances".into(),
            json!({"ode": ode, "quad": quad, "root": root}),
        );
    }
    envelope
}

/// Serializes with a trailing newline; `serde_json` maps are ordered, so
/// the output is stable.
pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}
