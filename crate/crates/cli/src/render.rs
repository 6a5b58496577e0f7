//! Plain-text rendering of a JSON report.
//!
//! The text form is produced from the same `serde_json::Value` as the JSON
//! form, so both carry identical numbers.

use serde_json::Value;

pub fn text(report: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = report {
        for (k, v) in map {
            write_entry(&mut out, 0, k, v);
        }
    } else {
        out.push_str(&scalar(report));
        out.push('\n');
    }
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn is_row(v: &Value) -> bool {
    matches!(v, Value::Array(xs) if xs.iter().all(is_scalar))
}

fn write_entry(out: &mut String, depth: usize, key: &str, v: &Value) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Array(xs) if !xs.is_empty() && xs.iter().all(|x| x.is_string()) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for x in xs {
                out.push_str(&format!("{pad}  - {}\n", scalar(x)));
            }
        }
        Value::Array(xs) if xs.iter().all(is_scalar) => {
            let row: Vec<String> = xs.iter().map(scalar).collect();
            out.push_str(&format!("{pad}{key}: {}\n", row.join(" ")));
        }
        Value::Array(xs) if !xs.is_empty() && xs.iter().all(is_row) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for x in xs {
                if let Value::Array(r) = x {
                    let row: Vec<String> = r.iter().map(scalar).collect();
                    out.push_str(&format!("{pad}  {}\n", row.join(" ")));
                }
            }
        }
        Value::Array(xs) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (i, x) in xs.iter().enumerate() {
                write_entry(out, depth + 1, &format!("[{i}]"), x);
            }
        }
        Value::Object(map) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (k, x) in map {
                write_entry(out, depth + 1, k, x);
            }
        }
        other => out.push_str(&format!("{pad}{key}: {}\n", scalar(other))),
    }
}
