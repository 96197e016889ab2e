//! File writers. Every float is written as a 17-significant-digit decimal.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nehari::branches::SweepRow;
use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::config::Format;
use crate::CliError;

pub const COLUMNS: [&str; 11] =
    ["lambda", "branch", "status", "phi", "h", "f", "residual", "tail_fraction", "iterations", "config_hash", "seed"];

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rewrite floats to fixed precision; non-finite values become the string "non-finite".
fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if x.is_finite() {
                Value::Number(Number::from_str(&num(x)).expect("formatted float parses"))
            } else {
                Value::String("non-finite".into())
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        v => v,
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    canonical(serde_json::to_value(x).expect("report serializes"))
}

/// Wrap a report with the config, its hash and the seed.
pub fn envelope(config: &Value, hash: &str, seed: u64, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("config_hash".into(), Value::String(hash.into()));
    m.insert("seed".into(), Value::from(seed));
    m.insert("config".into(), config.clone());
    m.insert("report".into(), body);
    Value::Object(m)
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    fs::write(dir.join(name), text).map_err(|e| CliError::Io(format!("{name}: {e}")))
}

/// One record per row: the fixed columns, with empty numeric fields for failed rows.
fn records(rows: &[SweepRow], hash: &str, seed: u64) -> Vec<[Option<String>; 11]> {
    rows.iter()
        .map(|r| {
            let label = Some(r.branch.label().to_string());
            let tail = [Some(hash.to_string()), Some(seed.to_string())];
            match &r.outcome {
                Ok(bp) => {
                    let e = &bp.report;
                    [
                        Some(num(r.lambda)),
                        label,
                        Some("ok".into()),
                        Some(num(e.phi)),
                        Some(num(e.h)),
                        Some(num(e.f)),
                        Some(num(e.residual)),
                        Some(num(e.tail_fraction)),
                        Some(bp.iterations.to_string()),
                        tail[0].clone(),
                        tail[1].clone(),
                    ]
                }
                Err(err) => [
                    Some(num(r.lambda)),
                    label,
                    Some(err.code().into()),
                    None,
                    None,
                    None,
                    None,
                    None,
                    None,
                    tail[0].clone(),
                    tail[1].clone(),
                ],
            }
        })
        .collect()
}

pub fn emit_diagram(dir: &Path, rows: &[SweepRow], format: Format, hash: &str, seed: u64) -> Result<String, CliError> {
    if rows.is_empty() {
        return Err(CliError::Precondition("no rows to emit".into()));
    }
    let recs = records(rows, hash, seed);
    let (name, bytes) = match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(COLUMNS).map_err(|e| CliError::Io(e.to_string()))?;
            for r in &recs {
                w.write_record(r.iter().map(|c| c.as_deref().unwrap_or(""))).map_err(|e| CliError::Io(e.to_string()))?;
            }
            ("branches.csv", w.into_inner().map_err(|e| CliError::Io(e.to_string()))?)
        }
        Format::Jsonl => {
            let mut out = Vec::new();
            for r in &recs {
                let mut m = Map::new();
                for (k, c) in COLUMNS.iter().zip(r) {
                    let v = match (*k, c) {
                        (_, None) => Value::Null,
                        ("branch" | "status" | "config_hash", Some(s)) => Value::String(s.clone()),
                        (_, Some(s)) => Value::Number(Number::from_str(s).expect("numeric column")),
                    };
                    m.insert((*k).into(), v);
                }
                serde_json::to_writer(&mut out, &Value::Object(m)).expect("json serializes");
                out.push(b'\n');
            }
            ("branches.jsonl", out)
        }
    };
    let mut f = fs::File::create(dir.join(name)).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
    f.write_all(&bytes).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
    Ok(name.to_string())
}
