//! Residual records and reports.
//!
//! Every identity check produces one [`ResidualRecord`] carrying a
//! dimensionless relative residual, the tolerance it was compared against
//! and the outcome. Reports aggregate records over a parameter grid with
//! deterministic ordering so identical configurations serialize to
//! identical bytes.

use serde_json::json;

/// Outcome of a single residual evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordStatus {
    Pass,
    Fail,
    /// A guarded denominator was degenerate at this grid point; the
    /// identity was not evaluated and the record is never counted as a
    /// pass.
    SkippedDegenerate,
    /// The configuration itself was rejected (e.g. B = 0 for auxiliary
    /// quantities).
    ConfigError,
}

impl RecordStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecordStatus::Pass => "pass",
            RecordStatus::Fail => "fail",
            RecordStatus::SkippedDegenerate => "skipped-degenerate",
            RecordStatus::ConfigError => "config-error",
        }
    }
}

/// One identity evaluated at one grid point.
#[derive(Debug, Clone)]
pub struct ResidualRecord {
    pub id: String,
    pub n: usize,
    /// Jump position, as a decimal string (keeps reports byte-stable).
    pub t: String,
    /// Evaluation point for z-dependent identities.
    pub z: Option<String>,
    /// Relative residual, `|LHS - RHS| / max(|LHS|, |RHS|, 1)`.
    pub residual: f64,
    pub tolerance: f64,
    pub status: RecordStatus,
    /// Extra context for skipped or failed records.
    pub note: Option<String>,
}

impl ResidualRecord {
    pub fn evaluated(id: &str, n: usize, t: String, residual: f64, tolerance: f64) -> Self {
        let status = if residual < tolerance {
            RecordStatus::Pass
        } else {
            RecordStatus::Fail
        };
        Self {
            id: id.to_string(),
            n,
            t,
            z: None,
            residual,
            tolerance,
            status,
            note: None,
        }
    }

    pub fn skipped(id: &str, n: usize, t: String, note: &str) -> Self {
        Self {
            id: id.to_string(),
            n,
            t,
            z: None,
            residual: f64::NAN,
            tolerance: f64::NAN,
            status: RecordStatus::SkippedDegenerate,
            note: Some(note.to_string()),
        }
    }

    pub fn config_error(id: &str, t: String, note: &str) -> Self {
        Self {
            id: id.to_string(),
            n: 0,
            t,
            z: None,
            residual: f64::NAN,
            tolerance: f64::NAN,
            status: RecordStatus::ConfigError,
            note: Some(note.to_string()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == RecordStatus::Pass
    }

    pub fn with_z(mut self, z: String) -> Self {
        self.z = Some(z);
        self
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }
}

/// Summary counts over a record set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub config_errors: usize,
}

impl Summary {
    pub fn of(records: &[ResidualRecord]) -> Self {
        let mut s = Summary::default();
        for r in records {
            match r.status {
                RecordStatus::Pass => s.pass += 1,
                RecordStatus::Fail => s.fail += 1,
                RecordStatus::SkippedDegenerate => s.skipped += 1,
                RecordStatus::ConfigError => s.config_errors += 1,
            }
        }
        s
    }

    pub fn all_passed(&self) -> bool {
        self.fail == 0 && self.config_errors == 0
    }
}

/// A full verification report over a parameter grid.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Description of the weight, echoed for reproducibility.
    pub weight: String,
    pub digits: u32,
    pub target_digits: u32,
    /// The t grid, as decimal strings.
    pub grid: Vec<String>,
    pub records: Vec<ResidualRecord>,
    pub summary: Summary,
}

impl ResidualReport {
    pub fn new(
        weight: String,
        digits: u32,
        target_digits: u32,
        grid: Vec<String>,
        mut records: Vec<ResidualRecord>,
    ) -> Self {
        sort_records(&mut records);
        let summary = Summary::of(&records);
        Self {
            weight,
            digits,
            target_digits,
            grid,
            records,
            summary,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "config": {
                "weight": self.weight,
                "digits": self.digits,
                "target_digits": self.target_digits,
                "t_grid": self.grid,
            },
            "records": self.records.iter().map(record_json).collect::<Vec<_>>(),
            "summary": {
                "pass": self.summary.pass,
                "fail": self.summary.fail,
                "skipped": self.summary.skipped,
                "config_errors": self.summary.config_errors,
            },
        })
    }

    /// CSV rows (without header): id, n, t, z, residual, tolerance, status, note.
    pub fn to_csv_rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                vec![
                    r.id.clone(),
                    r.n.to_string(),
                    r.t.clone(),
                    r.z.clone().unwrap_or_default(),
                    format_residual(r.residual),
                    format_residual(r.tolerance),
                    r.status.as_str().to_string(),
                    r.note.clone().unwrap_or_default(),
                ]
            })
            .collect()
    }

    pub const CSV_HEADER: [&'static str; 8] =
        ["id", "n", "t", "z", "residual", "tolerance", "status", "note"];
}

fn record_json(r: &ResidualRecord) -> serde_json::Value {
    json!({
        "id": r.id,
        "n": r.n,
        "t": r.t,
        "z": r.z,
        "residual": format_residual(r.residual),
        "tolerance": format_residual(r.tolerance),
        "status": r.status.as_str(),
        "note": r.note,
    })
}

fn format_residual(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.3e}")
    }
}

/// Deterministic record order: (id, n, t, z).
pub fn sort_records(records: &mut [ResidualRecord]) {
    records.sort_by(|a, b| {
        (&a.id, a.n, &a.t, &a.z).cmp(&(&b.id, b.n, &b.t, &b.z))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_counts_match() {
        let records = vec![
            ResidualRecord::evaluated("A", 1, "1".into(), 1e-50, 1e-40),
            ResidualRecord::evaluated("B", 1, "1".into(), 1e-10, 1e-40),
            ResidualRecord::skipped("C", 2, "1".into(), "degenerate"),
        ];
        let s = Summary::of(&records);
        assert_eq!(s.pass, 1);
        assert_eq!(s.fail, 1);
        assert_eq!(s.skipped, 1);
        assert!(!s.all_passed());
    }

    #[test]
    fn report_ordering_deterministic() {
        let a = ResidualRecord::evaluated("Z", 1, "1".into(), 0.0, 1.0);
        let b = ResidualRecord::evaluated("A", 3, "2".into(), 0.0, 1.0);
        let r1 = ResidualReport::new("w".into(), 64, 30, vec![], vec![a.clone(), b.clone()]);
        let r2 = ResidualReport::new("w".into(), 64, 30, vec![], vec![b, a]);
        assert_eq!(
            serde_json::to_string(&r1.to_json()).unwrap(),
            serde_json::to_string(&r2.to_json()).unwrap()
        );
    }
}
