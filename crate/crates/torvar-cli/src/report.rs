use crate::config::ExperimentConfig;
use serde::{Deserialize, Serialize};
use torvar::{HomotopyCertificate, TuplePath};

pub const REPORT_SCHEMA: u32 = 1;

/// Everything one `run` invocation produces. With a fixed seed the report is
/// identical across runs except for the `timing` block and
/// `summary.wall_seconds`.
#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub config: ExperimentConfig,
    /// ordered by trial index regardless of execution order
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
    pub timing: Timing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialOutcome {
    /// certificate produced and every check passed
    Pass,
    /// certificate produced but some check failed
    Fail,
    /// generation or construction errored; see `error`
    Error,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed_x: u64,
    pub seed_y: u64,
    pub outcome: TrialOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// endpoint tuples as Matrix Market blobs, one per component
    pub x_mm: Vec<String>,
    pub y_mm: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<HomotopyCertificate>,
    /// full path description; certificates re-verify offline from this plus
    /// the endpoint blobs
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<TuplePath>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
    pub pass_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_eps_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_eps_hat: Option<f64>,
    /// eps-hat / delta over certified trials: the measured locality constant
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_ratio: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Timing {
    /// milliseconds since the Unix epoch at run start
    pub started_unix_ms: u128,
}

pub(crate) fn median(sorted: &[f64]) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    })
}

impl Summary {
    pub fn from_records(records: &[TrialRecord], wall_seconds: f64, delta: f64) -> Summary {
        let passed = records
            .iter()
            .filter(|r| r.outcome == TrialOutcome::Pass)
            .count();
        let failed = records
            .iter()
            .filter(|r| r.outcome == TrialOutcome::Fail)
            .count();
        let errored = records.len() - passed - failed;
        let mut budgets: Vec<f64> = records
            .iter()
            .filter_map(|r| r.certificate.as_ref().map(|c| c.epsilon_budget))
            .collect();
        budgets.sort_by(f64::total_cmp);
        let max_eps_hat = budgets.last().copied();
        let median_eps_hat = median(&budgets);
        Summary {
            trials: records.len(),
            passed,
            failed,
            errored,
            pass_rate: passed as f64 / records.len().max(1) as f64,
            max_eps_hat,
            median_eps_hat,
            max_ratio: max_eps_hat.map(|v| v / delta),
            median_ratio: median_eps_hat.map(|v| v / delta),
            wall_seconds,
        }
    }
}
