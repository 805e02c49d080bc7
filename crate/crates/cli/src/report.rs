//! JSON reports and CSV tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

pub const REPORT_VERSION: &str = concat!("postsel-report/", env!("CARGO_PKG_VERSION"));

/// `{version, experiment, config, metrics, rows?}`. Maps are ordered, so
/// identical contents serialize to identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub experiment: String,
    pub config: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Value>>,
}

impl Report {
    pub fn new(experiment: impl Into<String>, config: BTreeMap<String, Value>) -> Self {
        Self {
            version: REPORT_VERSION.to_string(),
            experiment: experiment.into(),
            config,
            metrics: BTreeMap::new(),
            rows: None,
        }
    }

    pub fn metric<T: Serialize>(&mut self, key: &str, value: T) -> &mut Self {
        self.metrics
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn push_row<T: Serialize>(&mut self, row: T) {
        self.rows
            .get_or_insert_with(Vec::new)
            .push(serde_json::to_value(row).unwrap_or(Value::Null));
    }

    /// The `passed` metric, for acceptance reports.
    pub fn passed(&self) -> Option<bool> {
        self.metrics.get("passed").and_then(Value::as_bool)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Checks the report schema on a parsed JSON value.
pub fn validate_schema(v: &Value) -> std::result::Result<(), String> {
    let obj = v.as_object().ok_or("report is not an object")?;
    for key in obj.keys() {
        if !["version", "experiment", "config", "metrics", "rows"].contains(&key.as_str()) {
            return Err(format!("unexpected key {key:?}"));
        }
    }
    if !obj.get("version").is_some_and(Value::is_string) {
        return Err("version must be a string".into());
    }
    if !obj.get("experiment").is_some_and(Value::is_string) {
        return Err("experiment must be a string".into());
    }
    if !obj.get("config").is_some_and(Value::is_object) {
        return Err("config must be an object".into());
    }
    if !obj.get("metrics").is_some_and(Value::is_object) {
        return Err("metrics must be an object".into());
    }
    if let Some(rows) = obj.get("rows") {
        if !rows.is_array() {
            return Err("rows must be an array".into());
        }
    }
    Ok(())
}

/// Shortest decimal that parses back to `v`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:?}")
}

/// A CSV table with a header row. Format floats with [`fmt_float`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_schema() {
        let mut cfg = BTreeMap::new();
        cfg.insert("n".to_string(), Value::from(4));
        let mut r = Report::new("demo", cfg);
        r.metric("max_error", 0.1 + 0.2).metric("passed", true);
        r.push_row(serde_json::json!({"z": 0.5}));
        let text = r.to_json();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.metrics["max_error"].as_f64(), Some(0.30000000000000004));
        validate_schema(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(r.passed(), Some(true));
    }

    #[test]
    fn schema_rejects_bad_shapes() {
        assert!(validate_schema(&serde_json::json!([])).is_err());
        assert!(validate_schema(&serde_json::json!({"version": "1", "experiment": "x", "config": {}})).is_err());
        let extra = serde_json::json!({"version": "1", "experiment": "x", "config": {}, "metrics": {}, "wall": 1});
        assert!(validate_schema(&extra).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["z", "v"]);
        t.push(vec![fmt_float(0.1), fmt_float(1e-20)]);
        assert_eq!(t.to_csv(), "z,v\n0.1,1e-20\n");
    }
}
