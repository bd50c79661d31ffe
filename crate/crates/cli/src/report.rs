use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Bumped whenever a field changes meaning or disappears.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    #[serde(flatten)]
    pub body: ReportBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum ReportBody {
    Run(RunReport),
    Stats(StatsReport),
    Bench(BenchReport),
}

impl Report {
    pub fn new(body: ReportBody) -> Self {
        Self {
            version: REPORT_VERSION,
            body,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        anyhow::ensure!(
            report.version == REPORT_VERSION,
            "report version {} is not supported (expected {REPORT_VERSION})",
            report.version
        );
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub name: String,
    pub millis: f64,
}

impl Timing {
    pub fn new(name: &str, d: Duration) -> Self {
        Self {
            name: name.into(),
            millis: d.as_secs_f64() * 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub preset: String,
    pub mode: String,
    pub lambda: usize,
    pub seed: u64,
    pub tamper: String,
    /// `accept` or `reject`.
    pub verdict: String,
    pub rejected: bool,
    pub reject_reason: Option<String>,
    /// Value returned by an accepting verifier.
    pub value: Option<u64>,
    /// Plaintext result of the program on the inputs.
    pub expected: u64,
    pub correct: bool,
    pub decrypted: Option<u64>,
    pub challenge: Vec<usize>,
    pub ciphertext_components: usize,
    pub noise_budget_bits: f64,
    pub complaints: Vec<String>,
    pub state_digest: String,
    pub transcript_records: usize,
    pub timings: Vec<Timing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub scenario: String,
    pub tamper: String,
    pub lambda: usize,
    pub trials: u64,
    pub detected: u64,
    pub escaped: u64,
    pub detection_rate: f64,
    /// Wilson interval on the detection rate.
    pub interval: (f64, f64),
    pub confidence: f64,
    /// Detection rate a slot-guessing server cannot beat: `1 − 1/C(λ, λ/2)`.
    pub guess_bound: f64,
    pub bound_in_interval: bool,
    /// Rejection reasons by count.
    pub reasons: Vec<(String, u64)>,
    /// Seeds whose run escaped detection.
    pub escaped_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub operation: String,
    pub median_millis: f64,
    pub min_millis: f64,
    pub max_millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub preset: String,
    pub mode: String,
    pub degree: usize,
    pub iterations: usize,
    pub rows: Vec<BenchRow>,
}
