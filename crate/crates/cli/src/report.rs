use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;

/// Fields every report carries.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub command: &'static str,
    pub version: &'static str,
    /// `None` for deterministic commands.
    pub seed: Option<u64>,
}

impl Meta {
    pub fn new(command: &'static str, seed: Option<u64>) -> Self {
        Meta {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed,
        }
    }
}

/// Merges the metadata into the body's top-level object.
pub fn with_meta(meta: &Meta, body: &impl Serialize) -> serde_json::Result<Value> {
    let mut out = match serde_json::to_value(meta)? {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    match serde_json::to_value(body)? {
        Value::Object(m) => out.extend(m),
        other => {
            out.insert("result".into(), other);
        }
    }
    Ok(Value::Object(out))
}

pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("JSON values always serialize");
            s.push('\n');
            s
        }
        Format::Tsv => tsv_row(report),
    }
}

/// Header line plus one value line; nested values are written as compact JSON.
fn tsv_row(report: &Value) -> String {
    let Value::Object(map) = report else {
        return format!("{}\n", cell(report));
    };
    let keys: Vec<&str> = map.keys().map(String::as_str).collect();
    let values: Vec<String> = map.values().map(cell).collect();
    format!("{}\n{}\n", keys.join("\t"), values.join("\t"))
}

/// Header plus one line per record, each record a flat object.
pub fn tsv_table<T: Serialize>(records: &[T]) -> serde_json::Result<String> {
    let mut out = String::new();
    for (i, r) in records.iter().enumerate() {
        let Value::Object(map) = serde_json::to_value(r)? else {
            continue;
        };
        if i == 0 {
            out.push_str(&map.keys().cloned().collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
        out.push_str(&map.values().map(cell).collect::<Vec<_>>().join("\t"));
        out.push('\n');
    }
    Ok(out)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn meta_is_merged_into_body() {
        let v = with_meta(&Meta::new("score", None), &json!({"score": 1.5})).unwrap();
        assert_eq!(v["command"], "score");
        assert_eq!(v["seed"], Value::Null);
        assert_eq!(v["score"], 1.5);
        assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn tsv_flattens_nested_values() {
        let v = json!({"a": 1, "b": [[1, 2]], "c": null, "d": "x y"});
        assert_eq!(render(&v, Format::Tsv), "a\tb\tc\td\n1\t[[1,2]]\t\tx y\n");
    }

    #[test]
    fn tsv_table_rows() {
        let rows = vec![json!({"n": 1, "p": 0.5}), json!({"n": 2, "p": 0.25})];
        assert_eq!(tsv_table(&rows).unwrap(), "n\tp\n1\t0.5\n2\t0.25\n");
    }
}
