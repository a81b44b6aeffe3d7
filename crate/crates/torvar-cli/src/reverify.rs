//! Offline re-verification: every certificate in a report must reproduce
//! from nothing but the embedded endpoint matrices and path description.

use crate::mmio;
use crate::report::{Report, TrialOutcome};
use anyhow::{Context, Result};
use std::path::Path;
use torvar::{eth, tol_certificate, verify_path};

#[derive(Debug)]
pub struct ReverifyOutcome {
    pub trials_checked: usize,
    /// one message per trial that failed to re-verify
    pub failures: Vec<String>,
}

impl ReverifyOutcome {
    pub fn all_good(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-check every passed trial in the report file: endpoints must match the
/// embedded tuples and a fresh verification pass must stay within the
/// recorded budget. `samples` overrides the sample count (the recorded
/// count is used otherwise).
pub fn reverify_report(report_path: &Path, samples: Option<usize>) -> Result<ReverifyOutcome> {
    let text = std::fs::read_to_string(report_path)
        .with_context(|| format!("reading {}", report_path.display()))?;
    let report: Report = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", report_path.display()))?;
    anyhow::ensure!(
        report.schema == crate::report::REPORT_SCHEMA,
        "unsupported report schema {}",
        report.schema
    );
    let mut outcome = ReverifyOutcome {
        trials_checked: 0,
        failures: Vec::new(),
    };
    for rec in &report.trials {
        if rec.outcome != TrialOutcome::Pass {
            continue;
        }
        outcome.trials_checked += 1;
        let mut fail = |msg: String| {
            outcome.failures.push(format!("trial {}: {msg}", rec.trial));
        };
        let (Some(cert), Some(path)) = (&rec.certificate, &rec.path) else {
            fail("passed trial is missing its certificate or path".into());
            continue;
        };
        let x = match mmio::tuple_from_strings(&rec.x_mm) {
            Ok(x) => x,
            Err(e) => {
                fail(format!("start tuple: {e}"));
                continue;
            }
        };
        let y = match mmio::tuple_from_strings(&rec.y_mm) {
            Ok(y) => y,
            Err(e) => {
                fail(format!("end tuple: {e}"));
                continue;
            }
        };
        let num_samples = samples.unwrap_or(cert.samples).max(2);
        let fresh = match verify_path(
            path,
            report.config.variety,
            &x,
            cert.epsilon_budget,
            num_samples,
        ) {
            Ok(c) => c,
            Err(e) => {
                fail(format!("verification errored: {e}"));
                continue;
            }
        };
        if !fresh.passed {
            fail(format!(
                "fresh verification failed: defect {:.3e}, deviation {:.3e} vs budget {:.3e}",
                fresh.max_membership_defect, fresh.max_eth_deviation, cert.epsilon_budget
            ));
            continue;
        }
        let tol = tol_certificate(x.n());
        let start_gap = path.eval(0.0).and_then(|p| eth(&p, &x));
        let end_gap = path.eval(1.0).and_then(|p| eth(&p, &y));
        match (start_gap, end_gap) {
            (Ok(s), Ok(e)) => {
                if s > tol || e > tol {
                    fail(format!(
                        "endpoints off the recorded tuples: start {s:.3e}, end {e:.3e}, tol {tol:.3e}"
                    ));
                }
            }
            _ => fail("endpoint evaluation errored".into()),
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::runner::run_experiment;

    #[test]
    fn fresh_reports_reverify() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            n: 4,
            trials: 2,
            samples_per_segment: 8,
            delta: 0.1,
            out: dir.path().to_path_buf(),
            ..Default::default()
        };
        let (report, path) = run_experiment(&cfg).unwrap();
        assert_eq!(report.summary.passed, 2);
        let out = reverify_report(&path, Some(33)).unwrap();
        assert_eq!(out.trials_checked, 2);
        assert!(out.all_good(), "{:?}", out.failures);
    }

    #[test]
    fn tampered_reports_fail_reverification() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            n: 4,
            trials: 1,
            samples_per_segment: 8,
            delta: 0.1,
            out: dir.path().to_path_buf(),
            ..Default::default()
        };
        let (_, path) = run_experiment(&cfg).unwrap();
        let mut doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        // claim a budget tighter than the measured deviation
        doc["trials"][0]["certificate"]["epsilon_budget"] =
            serde_json::Value::from(1e-12);
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        let out = reverify_report(&path, None).unwrap();
        assert!(!out.all_good());
    }
}
