//! Rendering of command results as JSON, CSV or plain text.

use serde_json::{Map, Number, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Rounds every float to 12 significant digits; non-finite values are
/// already null after serialization.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Flattens nested objects into dotted keys.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            out.push((prefix.to_string(), a.iter().map(scalar).collect::<Vec<_>>().join(" ")));
        }
        other => out.push((prefix.to_string(), if other.is_array() { other.to_string() } else { scalar(other) })),
    }
}

/// Table rows: an array of objects, or the first array-of-objects field of an
/// object with the remaining scalar fields repeated on every row.
fn rows_of(v: &Value) -> Vec<Vec<(String, String)>> {
    let flat = |x: &Value| {
        let mut row = Vec::new();
        flatten("", x, &mut row);
        row
    };
    let is_table = |x: &Value| matches!(x, Value::Array(a) if !a.is_empty() && a.iter().all(Value::is_object));
    match v {
        Value::Array(a) => a.iter().map(flat).collect(),
        Value::Object(o) => match o.iter().find(|(_, x)| is_table(x)) {
            Some((key, Value::Array(items))) => {
                let shared: Vec<(String, String)> = o
                    .iter()
                    .filter(|(k, x)| *k != key && !x.is_object() && !x.is_array())
                    .map(|(k, x)| (k.clone(), scalar(x)))
                    .collect();
                items
                    .iter()
                    .map(|x| {
                        let mut row = shared.clone();
                        row.extend(flat(x));
                        row
                    })
                    .collect()
            }
            _ => vec![flat(v)],
        },
        other => vec![flat(other)],
    }
}

pub fn render(v: Value, format: Format) -> String {
    let v = round_floats(v);
    match format {
        Format::Json => serde_json::to_string_pretty(&v).unwrap_or_default() + "\n",
        Format::Csv => {
            let rows = rows_of(&v);
            let mut header: Vec<String> = Vec::new();
            for r in &rows {
                for (k, _) in r {
                    if !header.contains(k) {
                        header.push(k.clone());
                    }
                }
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut write = |rec: Vec<&str>| w.write_record(rec).expect("in-memory csv write");
            write(header.iter().map(String::as_str).collect());
            for r in &rows {
                write(header.iter().map(|h| r.iter().find(|(k, _)| k == h).map_or("", |(_, x)| x.as_str())).collect());
            }
            String::from_utf8(w.into_inner().expect("in-memory csv flush")).unwrap_or_default()
        }
        Format::Text => {
            let mut s = String::new();
            for (i, r) in rows_of(&v).iter().enumerate() {
                if i > 0 {
                    s.push('\n');
                }
                for (k, x) in r {
                    s.push_str(&format!("{k}: {x}\n"));
                }
            }
            s
        }
    }
}

pub fn object(pairs: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_keep_twelve_digits() {
        let v = round_floats(json!({"x": 0.1234567890123456, "n": 3, "y": [1.0 / 3.0]}));
        assert_eq!(v["x"], json!(0.123456789012));
        assert_eq!(v["n"], json!(3));
        assert_eq!(v["y"][0], json!(0.333333333333));
    }

    #[test]
    fn csv_flattens_rows() {
        let s = render(json!([{"a": 1, "b": {"c": "x,y"}}, {"a": 2, "b": {"c": "z"}}]), Format::Csv);
        assert_eq!(s, "a,b.c\n1,\"x,y\"\n2,z\n");
        let s = render(json!({"n": 2, "rows": [{"i": 0}, {"i": 3}]}), Format::Csv);
        assert_eq!(s, "n,i\n2,0\n2,3\n");
    }
}
