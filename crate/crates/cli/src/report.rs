use serde_json::{Map, Number, Value};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// The JSON document every command prints.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub seed: Option<u64>,
}

impl RunReport {
    pub fn new(command: &str, inputs: Value, results: Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            results,
            seed,
        }
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("inputs".into(), canonical(&self.inputs));
        m.insert("results".into(), canonical(&self.results));
        m.insert("seed".into(), self.seed.map_or(Value::Null, Value::from));
        m.insert("tool_version".into(), Value::String(TOOL_VERSION.into()));
        Value::Object(m)
    }

    /// Sorted keys, floats rounded to 12 significant digits, trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report values are serializable");
        s.push('\n');
        s
    }
}

pub fn round_sig(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// serde_json maps are ordered by key, so only the floats need work.
/// Non-finite floats become null.
fn canonical(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round_sig(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, v)| (k.clone(), canonical(v))).collect()),
        other => other.clone(),
    }
}
