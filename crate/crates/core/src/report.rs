//! Verification reports. The body is a pure function of seed and
//! configuration; wall time lives outside it.

use std::fmt::Write as _;

use serde::Serialize;

use crate::suite::CheckRecord;

pub const SCHEMA: &str = "bicheck-report/1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportBody {
    pub suite: String,
    pub seed: u64,
    pub config_digest: String,
    pub tol_scale: f64,
    pub passed: bool,
    pub records: Vec<CheckRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub body: ReportBody,
    pub wall_time_seconds: f64,
}

impl VerificationReport {
    pub fn new(seed: u64, config_digest: String, tol_scale: f64, records: Vec<CheckRecord>, wall_time_seconds: f64) -> Self {
        let passed = records.iter().all(|r| r.passed);
        VerificationReport {
            schema: SCHEMA,
            body: ReportBody { suite: "bicheck".into(), seed, config_digest, tol_scale, passed, records },
            wall_time_seconds,
        }
    }

    pub fn passed(&self) -> bool {
        self.body.passed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn body_json(&self) -> String {
        serde_json::to_string(&self.body).expect("report serializes")
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.body.records.iter().filter(|r| !r.passed)
    }

    pub fn to_human(&self) -> String {
        let b = &self.body;
        let mut s = String::new();
        let _ = writeln!(s, "bicheck  seed {}  config {}", b.seed, &b.config_digest[..12]);
        for r in &b.records {
            let verdict = if r.passed { "PASS" } else { "FAIL" };
            let _ = write!(
                s,
                "{verdict}  {:<20} {:<28} residual {:>10.3e}  tol {:.1e}  trials {:>3}  probes {:>4}",
                r.id, r.equation, r.residual, r.tolerance, r.trials, r.probes
            );
            for (k, v) in &r.metrics {
                let _ = write!(s, "  {k} = {v:.6}");
            }
            s.push('\n');
            for v in &r.violations {
                let _ = writeln!(s, "      violation: {v}");
            }
            if let Some(e) = &r.error {
                let _ = writeln!(s, "      error: {e}");
            }
        }
        let failed = b.records.iter().filter(|r| !r.passed).count();
        let _ = writeln!(
            s,
            "{}: {} of {} checks passed ({:.2} s)",
            if b.passed { "OK" } else { "FAILED" },
            b.records.len() - failed,
            b.records.len(),
            self.wall_time_seconds
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn record(id: &str, passed: bool) -> CheckRecord {
        CheckRecord {
            id: id.into(),
            equation: "Eq. (1)".into(),
            description: String::new(),
            trials: 1,
            probes: 1,
            residual: 0.0,
            tolerance: 1.0,
            passed,
            violations: vec![],
            metrics: BTreeMap::new(),
            error: None,
        }
    }

    #[test]
    fn overall_pass_is_conjunction() {
        let ok = VerificationReport::new(1, "0".repeat(64), 1.0, vec![record("a", true), record("b", true)], 0.0);
        assert!(ok.passed());
        let bad = VerificationReport::new(1, "0".repeat(64), 1.0, vec![record("a", true), record("b", false)], 0.0);
        assert!(!bad.passed());
        assert_eq!(bad.failures().count(), 1);
    }

    #[test]
    fn wall_time_is_outside_the_body() {
        let a = VerificationReport::new(1, "0".repeat(64), 1.0, vec![record("a", true)], 0.1);
        let b = VerificationReport::new(1, "0".repeat(64), 1.0, vec![record("a", true)], 7.0);
        assert_eq!(a.body_json(), b.body_json());
        let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(v["schema"], SCHEMA);
    }
}
