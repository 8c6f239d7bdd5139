//! Deterministic report serialization: sorted keys, floats rounded to 12
//! significant digits, integral floats written as integers.

use serde_json::{Map, Number, Value};
use std::fmt::Write;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn round_float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(format!("{x}"));
    }
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if r.fract() == 0.0 && r.abs() < 9.0e15 {
        Value::Number(Number::from(r as i64))
    } else {
        Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
    }
}

/// Round every float and rebuild objects so key order is lexicographic.
pub fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => round_float(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect()),
        Value::Object(o) => {
            let mut sorted: Vec<(String, Value)> = o.into_iter().collect();
            sorted.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(sorted.into_iter().map(|(k, v)| (k, canonicalize(v))).collect::<Map<_, _>>())
        }
        other => other,
    }
}

/// The common envelope: enough to reproduce the run.
pub fn envelope(command: &str, params: Value, result: Value, holds: bool) -> Value {
    let mut top = Map::new();
    top.insert("tool".into(), Value::from("misometry"));
    top.insert("version".into(), Value::from(VERSION));
    top.insert("command".into(), Value::from(command));
    top.insert("params".into(), params);
    top.insert("result".into(), result);
    top.insert("holds".into(), Value::from(holds));
    canonicalize(Value::Object(top))
}

pub fn to_json(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report values always serialize");
    s.push('\n');
    s
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn to_markdown(report: &Value) -> String {
    let mut out = String::new();
    let get = |k: &str| report.get(k).cloned().unwrap_or(Value::Null);
    let _ = writeln!(out, "# misometry {}\n", scalar(&get("command")));
    let _ = writeln!(out, "- version: {}", scalar(&get("version")));
    let _ = writeln!(out, "- holds: {}", scalar(&get("holds")));
    if let Some(params) = report.get("params").and_then(Value::as_object) {
        for (k, v) in params {
            let _ = writeln!(out, "- {k}: {}", scalar(v));
        }
    }
    let result = get("result");
    if let Some(pairs) = result.get("pairs").and_then(Value::as_array) {
        let _ = writeln!(out, "\n## Strict pairs\n\n| k | m | p |\n|---|---|---|");
        for (k, pair) in pairs.iter().enumerate() {
            let _ = writeln!(out, "| {} | {} | {} |", k + 1, scalar(&pair[0]), scalar(&pair[1]));
        }
    }
    let partitions = ["partition", "partition_q"].iter().filter_map(|k| result.get(*k).map(|p| (*k, p)));
    for (name, part) in partitions {
        let Some(levels) = part.get("levels").and_then(Value::as_array) else { continue };
        let total: u64 = levels.iter().filter_map(|l| l["count"].as_u64()).sum();
        let _ = writeln!(
            out,
            "\n## Levels observed ({name}, p = {})\n\n| nu | count | |\n|---|---|---|",
            scalar(&part["p"])
        );
        for l in levels {
            let count = l["count"].as_u64().unwrap_or(0);
            let bar = "#".repeat(((40 * count) / total.max(1)) as usize);
            let _ = writeln!(out, "| {} | {count} | {bar} |", scalar(&l["nu"]));
        }
    }
    let _ = writeln!(out, "\n## Result\n\n```json\n{}```", to_json(&result));
    out
}
