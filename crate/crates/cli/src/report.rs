//! Report assembly: experiment rows with a resolved-config header, emitted
//! as CSV (17 significant digits, '.' decimal) or JSON.

use chainbound::engine::fmt17;
use serde::Serialize;

/// One experiment row: parameter, quantity, source and value, with an
/// optional standard error for Monte Carlo rows.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub parameter: String,
    pub quantity: &'static str,
    pub source: &'static str,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

impl Row {
    pub fn new(parameter: impl ToString, quantity: &'static str, source: &'static str, value: f64) -> Self {
        Row { parameter: parameter.to_string(), quantity, source, value, stderr: None }
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }
}

/// Render rows as CSV with the resolved config echoed in a leading comment.
pub fn rows_to_csv(config: &serde_json::Value, rows: &[Row]) -> String {
    let mut out = format!("# config: {config}\n");
    out.push_str("parameter,quantity,value,stderr,source\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.parameter,
            r.quantity,
            fmt17(r.value),
            r.stderr.map(fmt17).unwrap_or_default(),
            r.source
        ));
    }
    out
}

/// Render rows as a JSON document with the resolved config embedded.
pub fn rows_to_json(config: &serde_json::Value, rows: &[Row]) -> String {
    let doc = serde_json::json!({ "config": config, "rows": rows });
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    text
}
