use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use pqnet::adversary::QberSample;
use pqnet::engine::{RunSummary, SweepRow};
use pqnet::kms::KmsRow;
use pqnet::TrialOutcome;
use serde::Serialize;

/// Shortest decimal that round-trips to the same f64.
pub fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().context("flushing csv")
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

pub fn trials_csv(outcomes: &[TrialOutcome]) -> Result<Vec<u8>> {
    csv_bytes(
        &[
            "trial_index",
            "success",
            "failure_reason",
            "slots_used",
            "t_dist_s",
            "f_end",
        ],
        outcomes.iter().enumerate().map(|(i, o)| {
            vec![
                i.to_string(),
                o.success.to_string(),
                o.failure_reason.map(|r| r.as_str().to_string()).unwrap_or_default(),
                o.slots_used.to_string(),
                opt(o.t_dist),
                opt(o.f_end.map(|f| f.value())),
            ]
        }),
    )
}

const SUMMARY_COLUMNS: [&str; 10] = [
    "n_trials",
    "n_successes",
    "success_rate",
    "mean_t_dist_s",
    "mean_slots_used",
    "f_end_mean",
    "f_end_min",
    "memory_expired",
    "message_late",
    "horizon_exceeded",
];

fn summary_cells(s: &RunSummary) -> Vec<String> {
    vec![
        s.n_trials.to_string(),
        s.n_successes.to_string(),
        num(s.success_rate),
        opt(s.mean_t_dist),
        num(s.mean_slots_used),
        opt(s.f_end_mean),
        opt(s.f_end_min),
        s.failures.memory_expired.to_string(),
        s.failures.message_late.to_string(),
        s.failures.horizon_exceeded.to_string(),
    ]
}

pub fn summary_csv(s: &RunSummary) -> Result<Vec<u8>> {
    csv_bytes(&SUMMARY_COLUMNS, [summary_cells(s)])
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut header = vec!["value"];
    header.extend(SUMMARY_COLUMNS);
    csv_bytes(
        &header,
        rows.iter().map(|r| {
            let mut cells = vec![num(r.value)];
            cells.extend(summary_cells(&r.summary));
            cells
        }),
    )
}

pub fn kms_csv(rows: &[KmsRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &["n", "mode", "cluster_size", "handshakes", "t_key_s"],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.mode.as_str().to_string(),
                r.cluster_size.map(|c| c.to_string()).unwrap_or_default(),
                r.handshakes.to_string(),
                num(r.t_key_s),
            ]
        }),
    )
}

pub fn samples_csv(baseline: &[QberSample], observed: &[QberSample]) -> Result<Vec<u8>> {
    let rows = baseline
        .iter()
        .map(|s| ("baseline", s))
        .chain(observed.iter().map(|s| ("observed", s)))
        .map(|(name, s)| {
            vec![
                name.to_string(),
                s.trial_index.to_string(),
                num(s.f_end),
                num(s.qber),
                num(s.measured_qber),
            ]
        });
    csv_bytes(&["side", "trial_index", "f_end", "qber", "measured_qber"], rows)
}

/// Writes `bytes` to `dir/name`, creating `dir` if needed.
pub fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn print(bytes: &[u8]) {
    print!("{}", String::from_utf8_lossy(bytes));
}
