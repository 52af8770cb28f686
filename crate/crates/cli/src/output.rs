//! Output envelope, float rounding and the two print formats.

use serde::Serialize;
use serde_json::{Map, Value};

/// Significant digits kept in printed floats.
pub const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Fail,
}

impl Status {
    pub fn from_gate(passed: bool) -> Self {
        if passed {
            Status::Ok
        } else {
            Status::Fail
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Fail => 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub command: String,
    pub inputs: Value,
    pub result: Value,
    pub status: Status,
}

impl Envelope {
    pub fn new(command: &str, inputs: Value, result: Value, status: Status) -> Self {
        Envelope { command: command.to_string(), inputs: round_value(inputs), result: round_value(result), status }
    }
}

/// `v` rounded to [`SIG_DIGITS`] significant digits. The decimal conversion
/// works on the exact binary value, rounding ties to even.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIG_DIGITS - 1, v).parse().unwrap_or(v)
}

/// Rounds every float leaf; integers and strings pass through.
pub fn round_value(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let v = n.as_f64().unwrap_or(f64::NAN);
            serde_json::Number::from_f64(round_sig(v)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

pub fn to_json(envelope: &Envelope) -> String {
    let mut text = serde_json::to_string_pretty(envelope).expect("envelope serializes");
    text.push('\n');
    text
}

/// Long format: `key,value` with dotted paths, array elements by index.
pub fn to_csv(envelope: &Envelope) -> String {
    let mut rows = vec![
        ("command".to_string(), envelope.command.clone()),
        ("status".to_string(), serde_json::to_value(envelope.status).map(leaf).unwrap_or_default()),
    ];
    flatten("inputs", &envelope.inputs, &mut rows);
    flatten("result", &envelope.result, &mut rows);
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        out.push_str(&k);
        out.push(',');
        out.push_str(&v);
        out.push('\n');
    }
    out
}

fn leaf(value: Value) -> String {
    match value {
        Value::String(s) => s,
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => flatten_map(prefix, map, rows),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), item, rows);
            }
        }
        other => rows.push((prefix.to_string(), leaf(other.clone()))),
    }
}

fn flatten_map(prefix: &str, map: &Map<String, Value>, rows: &mut Vec<(String, String)>) {
    for (k, v) in map {
        flatten(&format!("{prefix}.{k}"), v, rows);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(2.0 / 3.0), 0.666666666667);
        assert_eq!(round_sig(-1.0 / 3.0), -0.333333333333);
        assert_eq!(round_sig(1e-300 / 7.0), 1.42857142857e-301);
        assert_eq!(round_sig(0.1), 0.1);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(2.0_f64.powi(60)), 1.15292150461e18);
        // exact binary ties round to even
        assert_eq!(round_sig(100_000_000_000.5), 100_000_000_000.0);
        assert_eq!(round_sig(100_000_000_001.5), 100_000_000_002.0);
    }

    #[test]
    fn rounding_is_idempotent() {
        for v in [0.051293294387550536, 2.995732273553991, 1.6448536269514722, 1e-17, 123456.7890123456] {
            let once = round_sig(v);
            assert_eq!(round_sig(once), once);
        }
    }

    #[test]
    fn integers_and_tokens_untouched() {
        let v = round_value(json!({"count": 12345678901234567u64, "upper": "inf", "x": 0.12345678901234}));
        assert_eq!(v["count"], json!(12345678901234567u64));
        assert_eq!(v["upper"], json!("inf"));
        assert_eq!(v["x"], json!(0.123456789012));
    }

    #[test]
    fn csv_paths() {
        let env = Envelope::new("demo", json!({"n": 3}), json!({"a": [1.5, 2.0], "b": {"c": "inf"}}), Status::Ok);
        let csv = to_csv(&env);
        assert_eq!(
            csv,
            "key,value\ncommand,demo\nstatus,ok\ninputs.n,3\nresult.a.0,1.5\nresult.a.1,2.0\nresult.b.c,inf\n"
        );
    }
}
