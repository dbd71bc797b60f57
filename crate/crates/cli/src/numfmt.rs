//! Output numbers with 12 significant digits.

use serde::Serialize;
use serde_json::{Number, Value};

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_significant(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v)
}

/// Rounds every floating-point number in a JSON tree. Integers are kept.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_significant(n.as_f64().expect("f64 number"));
            Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// Serializes with rounded numbers. Non-finite values become `null`.
pub fn to_rounded_value<T: Serialize>(value: &T) -> serde_json::Result<Value> {
    serde_json::to_value(value).map(round_value)
}

pub fn to_rounded_string_pretty<T: Serialize>(value: &T) -> serde_json::Result<String> {
    serde_json::to_string_pretty(&to_rounded_value(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(round_significant(0.1 + 0.2), 0.3);
        assert_eq!(round_significant(54.698453422000924), 54.698453422);
        assert_eq!(round_significant(-1.23456789012345e-7), -1.23456789012e-7);
        assert_eq!(round_significant(0.0), 0.0);
        assert!(round_significant(f64::NAN).is_nan());
    }

    #[test]
    fn walks_nested_values() {
        let v = round_value(json!({"a": [1, 2.0000000000001, {"b": 1.0 / 3.0}], "c": "x", "n": 7}));
        assert_eq!(v, json!({"a": [1, 2.0, {"b": 0.333333333333}], "c": "x", "n": 7}));
    }

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(to_rounded_value(&vec![f64::NAN, 1.5]).unwrap(), json!([null, 1.5]));
    }
}
