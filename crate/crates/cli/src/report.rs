//! The versioned JSON result document.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub params: Value,
    pub metrics: Value,
    /// The bound the headline `ratio` is measured against, if any.
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    pub wall_time: f64,
    pub generator: &'static str,
}

impl Report {
    pub fn new(command: &str, params: Value, metrics: Value) -> Self {
        Self {
            schema: SCHEMA,
            command: command.to_owned(),
            params,
            metrics,
            bound: None,
            ratio: None,
            wall_time: 0.0,
            generator: weyllab::expsum::GENERATOR,
        }
    }

    pub fn with_ratio(mut self, measured: f64, bound: f64) -> Self {
        self.bound = Some(bound);
        self.ratio = Some(if bound > 0.0 { measured / bound } else { 0.0 });
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// The document with timing fields removed, for determinism checks.
pub fn strip_timing(json: &str) -> Result<Value, serde_json::Error> {
    let mut v: Value = serde_json::from_str(json)?;
    strip(&mut v);
    Ok(v)
}

fn strip(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.retain(|k, _| k != "wall_time");
            m.values_mut().for_each(strip);
        }
        Value::Array(a) => a.iter_mut().for_each(strip),
        _ => {}
    }
}
