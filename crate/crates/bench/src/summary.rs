//! Per-criterion summary statistics over seeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::experiment::{write, RunRecord, RunStatus, RESULTS_HEADER};
use crate::{sig12, BenchError, ExperimentConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub criterion: String,
    pub mean: Option<f64>,
    /// Sample standard deviation (n − 1 denominator); 0 for a single run.
    pub sd: Option<f64>,
    /// Set when `sd` is the single-run placeholder rather than an estimate.
    pub sd_degenerate: bool,
    /// Mean over shared successful seeds of (this − reference).
    pub mean_paired_diff: Option<f64>,
    pub n_runs: usize,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Summarizes successful runs per criterion, in `order`. The paired
/// difference is taken against `reference` (normally the confidence
/// baseline) over the seeds on which both succeeded.
pub fn summarize(runs: &[RunRecord], order: &[&str], reference: Option<&str>) -> Result<Vec<SummaryRow>, BenchError> {
    let mut by_criterion: BTreeMap<&str, BTreeMap<u64, f64>> = BTreeMap::new();
    for r in runs {
        if let (RunStatus::Ok, Some(acc)) = (&r.status, r.test_accuracy) {
            by_criterion.entry(&r.criterion).or_default().insert(r.seed, acc);
        }
    }
    if by_criterion.is_empty() {
        return Err(BenchError::NoSuccessfulRuns);
    }
    let empty = BTreeMap::new();
    let reference_runs = reference.map(|name| by_criterion.get(name).unwrap_or(&empty));

    let rows = order
        .iter()
        .map(|&name| {
            let accs = by_criterion.get(name).unwrap_or(&empty);
            let values: Vec<f64> = accs.values().copied().collect();
            let (mean_acc, sd, degenerate) = match values.len() {
                0 => (None, None, false),
                1 => (Some(values[0]), Some(0.0), true),
                _ => (Some(mean(&values)), Some(sample_sd(&values)), false),
            };
            let diffs: Vec<f64> = reference_runs
                .map(|base| {
                    accs.iter()
                        .filter_map(|(seed, acc)| base.get(seed).map(|b| acc - b))
                        .collect()
                })
                .unwrap_or_default();
            SummaryRow {
                criterion: name.to_string(),
                mean: mean_acc,
                sd,
                sd_degenerate: degenerate,
                mean_paired_diff: (!diffs.is_empty()).then(|| mean(&diffs)),
                n_runs: values.len(),
            }
        })
        .collect();
    Ok(rows)
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("criterion,mean,sd,mean_paired_diff_vs_confidence,n_runs,sd_flag\n");
    let f = |v: Option<f64>| v.map(sig12).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.criterion,
            f(r.mean),
            f(r.sd),
            f(r.mean_paired_diff),
            r.n_runs,
            if r.sd_degenerate { "degenerate" } else { "" }
        );
    }
    out
}

pub(crate) fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), BenchError> {
    write(path, &summary_csv(rows))
}

fn field(text: &str, line: usize, what: &str) -> Result<Option<f64>, BenchError> {
    if text.is_empty() {
        return Ok(None);
    }
    text.parse().map(Some).map_err(|_| BenchError::Results {
        line,
        message: format!("bad {what} {text:?}"),
    })
}

/// Parses a `results.csv` written by [`crate::run_experiment`].
pub fn parse_results(text: &str) -> Result<Vec<RunRecord>, BenchError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == RESULTS_HEADER => {}
        _ => {
            return Err(BenchError::Results {
                line: 1,
                message: format!("expected header {RESULTS_HEADER:?}"),
            })
        }
    }
    let mut runs = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(BenchError::Results {
                line: line_no,
                message: format!("expected 5 columns, found {}", cols.len()),
            });
        }
        let seed = cols[1].parse().map_err(|_| BenchError::Results {
            line: line_no,
            message: format!("bad seed {:?}", cols[1]),
        })?;
        runs.push(RunRecord {
            criterion: cols[0].to_string(),
            seed,
            test_accuracy: field(cols[2], line_no, "test_accuracy")?,
            baseline_accuracy: field(cols[3], line_no, "baseline_accuracy")?,
            status: if cols[4] == "ok" {
                RunStatus::Ok
            } else {
                RunStatus::Failed(cols[4].to_string())
            },
            trace_path: None,
        });
    }
    Ok(runs)
}

/// Recomputes `summary.csv` from the `results.csv` in a result directory.
/// The reference criterion is the confidence criterion of the saved
/// `config.toml`, or one named `confidence` if no config was saved.
pub fn summarize_dir(dir: &Path) -> Result<Vec<SummaryRow>, BenchError> {
    let results_path = dir.join("results.csv");
    let text = fs::read_to_string(&results_path).map_err(BenchError::io(&results_path))?;
    let runs = parse_results(&text)?;
    let config_path = dir.join("config.toml");
    let config = match fs::read_to_string(&config_path) {
        Ok(text) => Some(ExperimentConfig::from_toml(&text)?),
        Err(_) => None,
    };
    let (order, reference): (Vec<String>, Option<String>) = match &config {
        Some(c) => (
            c.criteria.iter().map(|n| n.name.clone()).collect(),
            c.criteria.iter().find(|n| n.criterion.is_confidence()).map(|n| n.name.clone()),
        ),
        None => {
            let mut order: Vec<String> = Vec::new();
            for r in &runs {
                if !order.contains(&r.criterion) {
                    order.push(r.criterion.clone());
                }
            }
            let reference = order.iter().find(|n| *n == "confidence").cloned();
            (order, reference)
        }
    };
    let order: Vec<&str> = order.iter().map(String::as_str).collect();
    let rows = summarize(&runs, &order, reference.as_deref())?;
    write_summary(&dir.join("summary.csv"), &rows)?;
    Ok(rows)
}
