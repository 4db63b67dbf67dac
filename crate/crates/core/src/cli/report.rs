//! The JSON report. Field names are stable; see `book/src/report.md`.

use serde::Serialize;

use crate::classify::{ClassificationResult, Verdict};
use crate::flatout::{FlatOutputReport, ParametrizationReport};
use crate::prolong::{LevelSummary, P2Failure, P2Report, P2Verdict, ProlongationOrder, SearchOutcome};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input: InputInfo,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<ProlongationOrder>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<usize>>,
    /// Tower ranks at `order`, one row per level.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ranks: Vec<LevelSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub analyses: Vec<ClassificationResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indices: Option<IndicesSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    pub exit_code: i32,
    /// Wall-clock milliseconds. The only field that varies between runs.
    pub timing_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputInfo {
    pub name: String,
    pub sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchSection {
    pub max_total: usize,
    pub accessibility_rank: usize,
    pub candidates: usize,
    /// Every visited order, filled with `--trace`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub j: ProlongationOrder,
    pub verdict: P2Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<P2Failure>,
    pub levels: Vec<LevelSummary>,
}

impl SearchSection {
    pub fn summary(out: &SearchOutcome) -> Self {
        SearchSection {
            max_total: out.max_total,
            accessibility_rank: out.accessibility_rank,
            candidates: out.steps.len(),
            trace: Vec::new(),
        }
    }
}

impl TraceStep {
    pub fn from_report(r: &P2Report) -> Self {
        TraceStep {
            j: r.j.clone(),
            verdict: r.verdict,
            failure: r.failure.clone(),
            levels: r.levels.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndicesSection {
    pub rho: Vec<usize>,
    pub kappa: Vec<usize>,
    pub kappa_sum: usize,
    pub g_rank: usize,
    pub delta_rank: usize,
    pub linear_system: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_outputs: Option<FlatOutputReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parametrization: Option<ParametrizationReport>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    /// Observed ranks when the rank is not constant on the samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
}
