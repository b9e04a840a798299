use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Where a report's numbers came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model_sha256: Option<String>,
    pub manifest_sha256: Option<String>,
    pub seed: Option<u64>,
    pub s: Option<usize>,
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_at_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_at_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_at_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

impl Metrics {
    /// Present metrics in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        [
            ("accuracy", self.accuracy),
            ("precision_at_1", self.precision_at_1),
            ("precision_at_k", self.precision_at_k),
            ("map_at_k", self.map_at_k),
            ("auc", self.auc),
            ("p_value", self.p_value),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub experiment: String,
    pub provenance: Provenance,
    pub metrics: Metrics,
    /// Extra scalar facts (k, direction, skipped queries, ...).
    pub details: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "NA".into(),
        other => other.to_string(),
    }
}

impl EvalReport {
    pub fn new(experiment: impl Into<String>, provenance: Provenance) -> Self {
        EvalReport { experiment: experiment.into(), provenance, ..Default::default() }
    }

    pub fn detail(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `key: value` lines under a `#` provenance header, then an optional
    /// tab-separated table.
    pub fn to_text(&self) -> String {
        let p = &self.provenance;
        let opt = |v: Option<String>| v.unwrap_or_else(|| "NA".into());
        let mut out = String::new();
        let _ = writeln!(out, "# experiment: {}", self.experiment);
        let _ = writeln!(out, "# model_sha256: {}", opt(p.model_sha256.clone()));
        let _ = writeln!(out, "# manifest_sha256: {}", opt(p.manifest_sha256.clone()));
        let _ = writeln!(out, "# seed: {}", opt(p.seed.map(|v| v.to_string())));
        let _ = writeln!(out, "# s: {}", opt(p.s.map(|v| v.to_string())));
        let _ = writeln!(out, "# eps: {}", opt(p.eps.map(|v| v.to_string())));
        for (k, v) in self.metrics.entries() {
            let _ = writeln!(out, "{k}: {v}");
        }
        for (k, v) in &self.details {
            let _ = writeln!(out, "{k}: {}", plain(v));
        }
        if let Some(t) = &self.table {
            out.push('\n');
            let _ = writeln!(out, "{}", t.columns.join("\t"));
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(plain).collect();
                let _ = writeln!(out, "{}", cells.join("\t"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EvalReport {
        let mut r = EvalReport::new(
            "retrieve",
            Provenance { seed: Some(3), s: Some(7), eps: Some(1e-6), ..Default::default() },
        );
        r.metrics.precision_at_1 = Some(0.5);
        r.metrics.map_at_k = Some(0.25);
        r.detail("k", 5);
        r
    }

    #[test]
    fn json_uses_metric_names() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["metrics"]["precision_at_1"], 0.5);
        assert_eq!(v["metrics"]["map_at_k"], 0.25);
        assert!(v["metrics"].get("accuracy").is_none());
        assert_eq!(v["provenance"]["s"], 7);
    }

    #[test]
    fn text_layout() {
        let mut r = sample();
        let mut t = Table::new(&["s", "accuracy"]);
        t.push(vec![1.into(), 0.5.into()]);
        r.table = Some(t);
        let text = r.to_text();
        assert!(text.starts_with("# experiment: retrieve\n# model_sha256: NA\n"));
        assert!(text.contains("# s: 7\n# eps: 0.000001\n"));
        assert!(text.contains("precision_at_1: 0.5\nmap_at_k: 0.25\nk: 5\n"));
        assert!(text.ends_with("s\taccuracy\n1\t0.5\n"));
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back: EvalReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
