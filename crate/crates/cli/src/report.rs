use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CaseRecord {
    pub id: String,
    /// Which identity or property the case checks.
    pub anchor: String,
    pub expected: Value,
    pub got: Value,
    /// Absent for purely integer cases.
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CaseRecord {
    /// `pass` requires `exact` and, when a residual is present, `residual <= tolerance`.
    pub fn new(id: impl Into<String>, anchor: impl Into<String>, expected: Value, got: Value, exact: bool, residual: Option<f64>, tolerance: f64) -> Self {
        let within = residual.is_none_or(|r| r <= tolerance);
        Self {
            id: id.into(),
            anchor: anchor.into(),
            expected,
            got,
            residual: residual.map(finite_or_max),
            tolerance: residual.map(|_| tolerance),
            pass: exact && within,
            error: None,
        }
    }

    pub fn failed(id: impl Into<String>, anchor: impl Into<String>, expected: Value, err: impl ToString) -> Self {
        Self {
            id: id.into(),
            anchor: anchor.into(),
            expected,
            got: Value::Null,
            residual: None,
            tolerance: None,
            pass: false,
            error: Some(err.to_string()),
        }
    }
}

// JSON has no infinities.
fn finite_or_max(r: f64) -> f64 {
    if r.is_finite() {
        r
    } else {
        f64::MAX
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub cases: Vec<CaseRecord>,
    pub summary: Summary,
    pub wall_time_s: f64,
}

impl RunReport {
    /// Sorts the cases by id.
    pub fn new(command: &'static str, config: Value, mut cases: Vec<CaseRecord>, wall_time_s: f64) -> Self {
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        let passed = cases.iter().filter(|c| c.pass).count();
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            summary: Summary { total: cases.len(), passed, failed: cases.len() - passed },
            cases,
            wall_time_s,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// Report JSON with the wall time zeroed, for comparing runs.
    pub fn deterministic_json(&self) -> String {
        let mut r = self.clone();
        r.wall_time_s = 0.0;
        serde_json::to_string_pretty(&r).expect("report serializes")
    }
}
