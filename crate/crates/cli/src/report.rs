use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The check could not be evaluated (a numerical routine failed).
    Error,
}

/// One verified property. `status` is `pass` exactly when
/// `residual <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    /// The mathematical statement the check certifies.
    pub anchor: String,
    pub status: Status,
    pub residual: f64,
    pub threshold: f64,
    pub runtime_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// What a check measures: the residual plus an optional note.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub residual: f64,
    pub detail: Option<String>,
}

impl Measurement {
    pub fn new(residual: f64) -> Self {
        Measurement { residual, detail: None }
    }

    pub fn with_detail(residual: f64, detail: impl Into<String>) -> Self {
        Measurement { residual, detail: Some(detail.into()) }
    }
}

impl Record {
    /// Runs `body`, timing it; an `Err` becomes a record with status `error`
    /// naming the failing operation.
    pub fn run<F>(name: &str, anchor: &str, threshold: f64, body: F) -> Record
    where
        F: FnOnce() -> Result<Measurement, cmspace::Error>,
    {
        let start = Instant::now();
        let outcome = body();
        let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(m) => Record {
                name: name.into(),
                anchor: anchor.into(),
                status: if m.residual <= threshold { Status::Pass } else { Status::Fail },
                residual: m.residual,
                threshold,
                runtime_ms,
                detail: m.detail,
            },
            Err(e) => Record {
                name: name.into(),
                anchor: anchor.into(),
                status: Status::Error,
                residual: f64::INFINITY,
                threshold,
                runtime_ms,
                detail: Some(format!("{name}: {e}")),
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    pub summary: Summary,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(config: RunConfig, mut records: Vec<Record>) -> Report {
        records.sort_by(|a, b| a.name.cmp(&b.name));
        let count = |s: Status| records.iter().filter(|r| r.status == s).count();
        let summary = Summary {
            total: records.len(),
            passed: count(Status::Pass),
            failed: count(Status::Fail),
            errors: count(Status::Error),
        };
        Report { schema_version: SCHEMA_VERSION, config, summary, records }
    }

    /// 0 when everything passed, 3 if any check errored, else 1.
    pub fn exit_code(&self) -> i32 {
        if self.summary.errors > 0 {
            3
        } else if self.summary.failed > 0 {
            1
        } else {
            0
        }
    }

    /// JSON with `runtime_ms` zeroed, for determinism comparisons.
    pub fn without_timings(&self) -> Report {
        let mut r = self.clone();
        for rec in &mut r.records {
            rec.runtime_ms = 0.0;
        }
        r
    }

    /// One line per record plus a totals line.
    pub fn human_summary(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let tag = match r.status {
                Status::Pass => "PASS ",
                Status::Fail => "FAIL ",
                Status::Error => "ERROR",
            };
            out.push_str(&format!("{tag} {:<32} {:>10.3e} <= {:<9.1e} ({:.0} ms)\n", r.name, r.residual, r.threshold, r.runtime_ms));
        }
        out.push_str(&format!(
            "{} checks: {} passed, {} failed, {} errors\n",
            self.summary.total, self.summary.passed, self.summary.failed, self.summary.errors
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_threshold() {
        let r = Record::run("a", "x", 1.0, || Ok(Measurement::new(1.0)));
        assert!(r.passed());
        let r = Record::run("b", "x", 1.0, || Ok(Measurement::new(1.5)));
        assert_eq!(r.status, Status::Fail);
        let r = Record::run("c", "x", 1.0, || Ok(Measurement::new(f64::NAN)));
        assert_eq!(r.status, Status::Fail);
        let r = Record::run("d", "x", 1.0, || Err(cmspace::Error::Singular));
        assert_eq!(r.status, Status::Error);
        assert!(r.detail.unwrap().starts_with("d: "));
    }

    #[test]
    fn records_sorted_and_exit_codes() {
        let recs = vec![
            Record::run("z", "", 1.0, || Ok(Measurement::new(0.0))),
            Record::run("a", "", 1.0, || Ok(Measurement::new(0.0))),
        ];
        let rep = Report::new(RunConfig::default(), recs);
        assert_eq!(rep.records[0].name, "a");
        assert_eq!(rep.exit_code(), 0);
        let rep = Report::new(RunConfig::default(), vec![Record::run("f", "", 0.0, || Ok(Measurement::new(1.0)))]);
        assert_eq!(rep.exit_code(), 1);
    }
}
