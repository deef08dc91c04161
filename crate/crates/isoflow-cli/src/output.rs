//! Report serialization and small file helpers.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Pretty JSON with every float printed as `{:.16e}` (17 significant digits),
/// so identical inputs give byte-identical files. Non-finite floats are
/// already `null` once converted to a `Value`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Usage(format!("report serialization: {e}")))?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.extend(std::iter::repeat("  ").take(d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                match n.as_f64() {
                    Some(x) if x.is_finite() => {
                        // no negative zeros in reports
                        let x = if x == 0.0 { 0.0 } else { x };
                        let _ = write!(out, "{x:.16e}");
                    }
                    _ => out.push_str("null"),
                }
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(depth + 1, out);
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(depth + 1, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push('}');
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = to_json(value)?;
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Float cell for CSV output.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", if x == 0.0 { 0.0 } else { x })
    } else {
        String::new()
    }
}

pub fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_path(path).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    wr.write_record(header).map_err(io)?;
    for row in rows {
        wr.write_record(row).map_err(io)?;
    }
    wr.flush().map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits_and_nan_is_null() {
        let text = to_json(&serde_json::json!({"a": 0.5, "b": 3, "c": f64::NAN, "d": [1.0]})).unwrap();
        assert!(text.contains("\"a\": 5.0000000000000000e-1"));
        assert!(text.contains("\"b\": 3"));
        assert!(text.contains("\"c\": null"));
        assert!(text.contains("1.0000000000000000e0"));
    }

    #[test]
    fn empty_containers_stay_compact() {
        let text = to_json(&serde_json::json!({"a": [], "b": {}})).unwrap();
        assert_eq!(text, "{\n  \"a\": [],\n  \"b\": {}\n}\n");
    }
}
