//! Aggregation of replicated audit outcomes into summary rows.

use seqaudit_core::seq_test::{AuditResult, Strategy};

/// The fold input: what one replication contributes to a summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub rejected: bool,
    pub stopping_time: Option<u64>,
}

impl From<&AuditResult> for RunOutcome {
    fn from(r: &AuditResult) -> Self {
        RunOutcome {
            rejected: r.rejected,
            stopping_time: r.stopping_time,
        }
    }
}

/// One row of a results table: rejection rate and conditional mean stopping
/// time with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub mechanism: String,
    pub epsilon: f64,
    pub strategy: Strategy,
    pub rejection_rate: f64,
    pub rate_stderr: f64,
    /// Mean samples to reject, over rejecting runs only; absent when the
    /// rate is zero.
    pub mean_stop: Option<f64>,
    pub stop_stderr: Option<f64>,
    pub runs: u32,
}

pub fn strategy_str(strategy: Strategy) -> &'static str {
    match strategy {
        Strategy::OnsSupermartingale => "ons",
        Strategy::EProcess => "eprocess",
    }
}

/// Pure fold from outcomes to a summary row.
pub fn summarize(
    mechanism: impl Into<String>,
    epsilon: f64,
    strategy: Strategy,
    outcomes: &[RunOutcome],
) -> SummaryRow {
    let runs = outcomes.len() as u32;
    let stops: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.rejected)
        .filter_map(|o| o.stopping_time.map(|t| t as f64))
        .collect();
    let k = stops.len();
    let rate = if runs == 0 {
        0.0
    } else {
        k as f64 / runs as f64
    };
    let rate_stderr = if runs == 0 {
        0.0
    } else {
        (rate * (1.0 - rate) / runs as f64).sqrt()
    };
    let (mean_stop, stop_stderr) = if k == 0 {
        (None, None)
    } else {
        let mean = stops.iter().sum::<f64>() / k as f64;
        let stderr = if k >= 2 {
            let var = stops.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        } else {
            0.0
        };
        (Some(mean), Some(stderr))
    };
    SummaryRow {
        mechanism: mechanism.into(),
        epsilon,
        strategy,
        rejection_rate: rate,
        rate_stderr,
        mean_stop,
        stop_stderr,
        runs,
    }
}
