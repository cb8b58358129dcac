//! Evaluation report rows and their CSV/JSON forms.

use serde::Serialize;

pub const CSV_HEADER: &str = "scenario,speed_kmh,horizon_ms,method,nmse_db,cosine_pct,n";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub scenario: String,
    pub speed_kmh: f64,
    pub horizon_ms: f64,
    pub method: String,
    /// Empty for beam predictors.
    pub nmse_db: Option<f64>,
    pub cosine_pct: f64,
    pub n: usize,
}

impl ReportRow {
    pub fn csv_line(&self) -> String {
        let nmse = self.nmse_db.map(|v| format!("{v:.4}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{:.3},{}",
            self.scenario,
            fmt_num(self.speed_kmh),
            fmt_num(self.horizon_ms),
            self.method,
            nmse,
            self.cosine_pct,
            self.n
        )
    }
}

/// Shortest decimal with at most three fractional digits.
fn fmt_num(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Per-model metadata carried in the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub file: String,
    pub method: String,
    pub horizon_ms: f64,
    pub dtype: String,
    /// Mean training-objective loss over the evaluated partition.
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsonReport {
    pub partition: String,
    pub seed: u64,
    pub dataset_sha256: String,
    pub models: Vec<ModelSummary>,
    pub rows: Vec<ReportRow>,
}
