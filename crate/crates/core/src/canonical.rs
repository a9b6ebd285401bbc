//! Canonical JSON: object keys sorted lexicographically at every level.

use serde::Serialize;
use serde_json::{Map, Value};

/// Rebuilds `value` with every object's keys inserted in sorted order, so the
/// output is sorted whether or not serde_json preserves insertion order.
pub fn sort_keys(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut sorted = Map::new();
            for (k, v) in entries {
                sorted.insert(k, sort_keys(v));
            }
            Value::Object(sorted)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize + ?Sized>(value: &T) -> Value {
    sort_keys(serde_json::to_value(value).expect("archive types serialize to JSON"))
}

/// Single-line canonical form, used for journal records.
pub fn to_line<T: Serialize + ?Sized>(value: &T) -> String {
    to_value(value).to_string()
}

/// Indented canonical form with a trailing newline, used for exports.
pub fn to_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(&to_value(value)).expect("JSON value serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_recursively() {
        let v = serde_json::json!({"b": 1, "a": {"d": [ {"z": 1, "y": 2} ], "c": 3}});
        assert_eq!(to_line(&v), r#"{"a":{"c":3,"d":[{"y":2,"z":1}]},"b":1}"#);
    }
}
