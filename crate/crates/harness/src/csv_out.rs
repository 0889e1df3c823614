//! CSV writers. Every file starts with a `# config_hash=` comment line so
//! results are traceable to the exact configuration that produced them;
//! floats carry 13 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use seqaudit_core::seq_test::{trace_to_csv, StepRecord};

use crate::summary::{strategy_str, SummaryRow};
use crate::{HarnessError, Result};

pub const SUMMARY_HEADER: &str =
    "mechanism,epsilon,strategy,rejection_rate,rate_stderr,mean_stop,stop_stderr,runs";

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| HarnessError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    std::fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn summary_to_csv(config_hash: u64, rows: &[SummaryRow]) -> String {
    let mut out = format!("# config_hash={config_hash:016x}\n{SUMMARY_HEADER}\n");
    for r in rows {
        let mean = r.mean_stop.map(|m| format!("{m:.12e}")).unwrap_or_default();
        let stderr = r
            .stop_stderr
            .map(|s| format!("{s:.12e}"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:.12e},{},{:.12e},{:.12e},{},{},{}",
            r.mechanism,
            r.epsilon,
            strategy_str(r.strategy),
            r.rejection_rate,
            r.rate_stderr,
            mean,
            stderr,
            r.runs
        );
    }
    out
}

pub fn write_summary(path: &Path, config_hash: u64, rows: &[SummaryRow]) -> Result<()> {
    write_file(path, &summary_to_csv(config_hash, rows))
}

pub fn write_trace(path: &Path, config_hash: u64, trace: &[StepRecord]) -> Result<()> {
    let body = trace_to_csv(trace);
    write_file(path, &format!("# config_hash={config_hash:016x}\n{body}"))
}

/// Generic table writer for the non-summary schemas (decoupling grid,
/// ε lower-bound traces).
pub fn write_table(path: &Path, config_hash: u64, header: &str, rows: &[String]) -> Result<()> {
    let mut out = format!("# config_hash={config_hash:016x}\n{header}\n");
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    write_file(path, &out)
}

/// `<dir>/<name>` with forward-slash-free names.
pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// Parses a trace CSV back into (t, decision) pairs; used to re-aggregate
/// summaries from trace files.
pub fn read_trace_outcome(path: &Path) -> Result<crate::summary::RunOutcome> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut last: Option<(u64, String)> = None;
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("t,") || line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let t: u64 = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| HarnessError::Usage(format!("bad trace row: {line}")))?;
        let decision = fields
            .nth(3)
            .ok_or_else(|| HarnessError::Usage(format!("bad trace row: {line}")))?;
        last = Some((t, decision.to_string()));
    }
    let rejected = matches!(&last, Some((_, d)) if d == "reject");
    Ok(crate::summary::RunOutcome {
        rejected,
        stopping_time: rejected.then(|| last.unwrap().0),
    })
}
