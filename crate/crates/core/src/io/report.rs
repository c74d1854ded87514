//! JSON report envelope shared by the command-line tools.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// `{"schema": 1, "report": name, ...body}`; `body` must serialize to an object.
pub fn envelope<T: Serialize>(name: &str, body: &T) -> Result<Value> {
    let mut v = serde_json::to_value(body).map_err(|e| Error::Io(e.to_string()))?;
    let obj = v
        .as_object_mut()
        .ok_or_else(|| Error::Io(format!("{name} report is not an object")))?;
    let mut out = serde_json::Map::new();
    out.insert("schema".into(), json!(SCHEMA_VERSION));
    out.insert("report".into(), json!(name));
    out.append(obj);
    Ok(Value::Object(out))
}

/// Rounded percentage with two decimals, e.g. `0.040298 -> "4.03%"`.
pub fn percent(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_and_percent() {
        let v = envelope("compute", &json!({"value": 0.5})).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["report"], "compute");
        assert_eq!(v["value"], 0.5);
        assert!(envelope("x", &1.0).is_err());
        assert_eq!(percent(0.0626455), "6.26%");
    }
}
