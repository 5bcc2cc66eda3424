//! Number formatting shared by CSV and JSON reports.

use serde_json::Value;

use crate::scalar::Scalar;

/// Shortest round-trip decimal; non-finite values as `inf`, `-inf`, `nan`.
pub fn fmt_num<T: Scalar>(v: T) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == T::infinity() {
        "inf".into()
    } else if v == T::neg_infinity() {
        "-inf".into()
    } else {
        format!("{v:e}")
    }
}

/// JSON number, or the string form of a non-finite value.
pub fn json_num<T: Scalar>(v: T) -> Value {
    let f = v.as_f64();
    serde_json::Number::from_f64(f).map(Value::Number).unwrap_or_else(|| Value::String(fmt_num(v)))
}

pub fn json_opt<T: Scalar>(v: Option<T>) -> Value {
    v.map(json_num).unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_round_trip() {
        for v in [0.1, 1e-8, 3.0, 16.0 / 3.0, 123456.789] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(json_num(f64::INFINITY), Value::String("inf".into()));
        assert_eq!(json_num(0.5), serde_json::json!(0.5));
    }
}
