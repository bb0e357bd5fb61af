use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

/// Version of the report layout documented in `docs/report-schema.md`.
pub const SCHEMA_VERSION: u32 = 1;

/// Common wrapper around every command's payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub results: Value,
    pub tool_version: String,
    pub tolerance: f64,
}

impl ReportEnvelope {
    pub fn new(command: &str, tolerance: f64) -> Self {
        ReportEnvelope {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            results: Value::Null,
            tool_version: format!("{} (schema {SCHEMA_VERSION})", env!("CARGO_PKG_VERSION")),
            tolerance,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.to_string(), to_value(value));
        self
    }

    pub fn results(mut self, value: impl Serialize) -> Self {
        self.results = to_value(value);
        self
    }
}

fn to_value(v: impl Serialize) -> Value {
    // every payload type is plain data; a failure here is a programming error
    serde_json::to_value(v).expect("report payload serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trip() {
        let env = ReportEnvelope::new("audit", 1e-12)
            .param("d1", "psi-")
            .param("shots", 160000u64)
            .results(json!({"p_joint": 0.0625, "phase": {"re": -1.0, "im": 0.0}, "r": {"num": 1, "den": 16}}));
        let text = serde_json::to_string(&env).unwrap();
        let back: ReportEnvelope = serde_json::from_str(&text).unwrap();
        assert_eq!(back, env);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn tolerance_survives_exactly() {
        for tol in [1e-12, 3.7e-9, f64::MIN_POSITIVE] {
            let env = ReportEnvelope::new("expand", tol);
            let back: ReportEnvelope = serde_json::from_str(&serde_json::to_string(&env).unwrap()).unwrap();
            assert_eq!(back.tolerance.to_bits(), tol.to_bits());
        }
    }
}
