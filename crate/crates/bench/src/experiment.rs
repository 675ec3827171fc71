//! Running an experiment: splits per seed, one job per (criterion, seed).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pls_core::datagen::{self, Dataset, Split};
use pls_core::engine::run_pseudo_labeling;
use pls_core::{EngineOptions, LabeledSet, Learner, LogisticRegression, ModelFit, PriorSpec};
use rayon::prelude::*;

use crate::config::{split_seed, ExperimentConfig};
use crate::summary::{summarize, write_summary, SummaryRow};
use crate::{sig12, BenchError};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    /// Overrides the config's output directory.
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub criterion: String,
    pub seed: u64,
    pub test_accuracy: Option<f64>,
    pub baseline_accuracy: Option<f64>,
    pub status: RunStatus,
    pub trace_path: Option<PathBuf>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitRecord {
    pub seed: u64,
    pub checksum: Option<u64>,
    pub baseline_accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub output_dir: PathBuf,
    /// Sorted by (criterion name, seed).
    pub runs: Vec<RunRecord>,
    pub splits: Vec<SplitRecord>,
    /// `None` when no run succeeded.
    pub summary: Option<Vec<SummaryRow>>,
}

impl ExperimentResult {
    pub fn failed_runs(&self) -> usize {
        self.runs.iter().filter(|r| !r.is_ok()).count()
    }
}

/// Fraction of rows whose thresholded prediction (`p > 0.5`) matches the label.
pub fn accuracy(learner: &LogisticRegression<f64>, fit: &ModelFit<f64>, test: &LabeledSet<f64>) -> pls_core::Result<f64> {
    let mut correct = 0usize;
    for (x, &y) in test.rows().zip(test.labels()) {
        let predicted = u8::from(learner.predict_proba(fit, x)? > 0.5);
        correct += usize::from(predicted == y);
    }
    Ok(correct as f64 / test.n() as f64)
}

struct SeedData {
    split: Split<f64>,
    baseline: f64,
}

fn prepare_seed(
    config: &ExperimentConfig,
    table: Option<&Dataset<f64>>,
    seed: u64,
    learner: &LogisticRegression<f64>,
    prior: &PriorSpec<f64>,
) -> pls_core::Result<SeedData> {
    let generated;
    let data = match table {
        Some(t) => t,
        None => {
            let spec = config.synthetic_spec(seed).expect("synthetic source");
            generated = datagen::generate(&spec)?;
            &generated
        }
    };
    let split = datagen::split(data, &config.split_spec(seed))?;
    let fit = learner.fit(&split.labeled, prior)?;
    let baseline = accuracy(learner, &fit, &split.test)?;
    Ok(SeedData { split, baseline })
}

fn trace_file(criterion: &str, seed: u64) -> String {
    format!("{criterion}__seed{seed}.csv")
}

/// Runs every (criterion, seed) pair and writes all outputs under the
/// output directory. Config problems are reported before any run starts;
/// failures inside a run are recorded in its row.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentResult, BenchError> {
    let table = config.load_table()?;
    config.validate(table.as_ref().map(Dataset::d))?;
    let prior = config.prior_spec()?;
    let stop = config.stopping.build();
    let output_dir = options
        .output_dir
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("bench-output"));
    let traces_dir = output_dir.join("traces");
    fs::create_dir_all(&traces_dir).map_err(BenchError::io(&traces_dir))?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = options.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| BenchError::Config(format!("cannot start worker pool: {e}")))?;

    let learner = LogisticRegression::<f64>::default();
    let seeds: Vec<(u64, pls_core::Result<SeedData>)> = pool.install(|| {
        config
            .seeds
            .par_iter()
            .map(|&seed| (seed, prepare_seed(config, table.as_ref(), seed, &learner, &prior)))
            .collect()
    });

    let mut jobs: Vec<(usize, usize)> = (0..config.criteria.len())
        .flat_map(|c| (0..seeds.len()).map(move |s| (c, s)))
        .collect();
    jobs.sort_by(|a, b| {
        (&config.criteria[a.0].name, config.seeds[a.1]).cmp(&(&config.criteria[b.0].name, config.seeds[b.1]))
    });

    let runs: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, s)| {
                let named = &config.criteria[c];
                let (seed, prepared) = &seeds[s];
                let mut record = RunRecord {
                    criterion: named.name.clone(),
                    seed: *seed,
                    test_accuracy: None,
                    baseline_accuracy: None,
                    status: RunStatus::Ok,
                    trace_path: None,
                };
                let data = match prepared {
                    Ok(data) => data,
                    Err(e) => {
                        record.status = RunStatus::Failed(format!("data preparation: {e}"));
                        return record;
                    }
                };
                record.baseline_accuracy = Some(data.baseline);
                let spec = named.criterion.build(prior);
                let outcome = run_pseudo_labeling(
                    &learner,
                    &data.split.labeled,
                    &data.split.unlabeled,
                    &spec,
                    stop,
                    EngineOptions::default(),
                );
                let trace = match &outcome {
                    Ok(out) => &out.trace,
                    Err(failure) => &failure.partial_trace,
                };
                let path = traces_dir.join(trace_file(&named.name, *seed));
                if let Err(e) = fs::write(&path, trace.to_records()) {
                    record.status = RunStatus::Failed(format!("writing {}: {e}", path.display()));
                    return record;
                }
                record.trace_path = Some(path);
                match outcome.map_err(|f| f.to_string()).and_then(|out| {
                    accuracy(&learner, &out.final_fit, &data.split.test).map_err(|e| e.to_string())
                }) {
                    Ok(acc) => record.test_accuracy = Some(acc),
                    Err(message) => record.status = RunStatus::Failed(message),
                }
                record
            })
            .collect()
    });

    let splits: Vec<SplitRecord> = seeds
        .iter()
        .map(|(seed, prepared)| match prepared {
            Ok(data) => SplitRecord {
                seed: *seed,
                checksum: Some(data.split.checksum()),
                baseline_accuracy: Some(data.baseline),
                error: None,
            },
            Err(e) => SplitRecord {
                seed: *seed,
                checksum: None,
                baseline_accuracy: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let reference = config
        .criteria
        .iter()
        .find(|c| c.criterion.is_confidence())
        .map(|c| c.name.as_str());
    let order: Vec<&str> = config.criteria.iter().map(|c| c.name.as_str()).collect();
    let summary = match summarize(&runs, &order, reference) {
        Ok(rows) => Some(rows),
        Err(BenchError::NoSuccessfulRuns) => None,
        Err(e) => return Err(e),
    };

    write(&output_dir.join("results.csv"), &results_csv(&runs))?;
    write(&output_dir.join("splits.csv"), &splits_csv(config, &splits))?;
    write(&output_dir.join("config.toml"), &config.to_toml())?;
    if let Some(rows) = &summary {
        write_summary(&output_dir.join("summary.csv"), rows)?;
    }
    let failures: String = runs
        .iter()
        .filter_map(|r| match &r.status {
            RunStatus::Failed(m) => Some(format!("{} seed {}: {m}\n", r.criterion, r.seed)),
            RunStatus::Ok => None,
        })
        .collect();
    let failures_path = output_dir.join("failures.txt");
    if failures.is_empty() {
        let _ = fs::remove_file(&failures_path);
    } else {
        write(&failures_path, &failures)?;
    }

    Ok(ExperimentResult {
        output_dir,
        runs,
        splits,
        summary,
    })
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<(), BenchError> {
    fs::write(path, contents).map_err(BenchError::io(path))
}

fn opt(value: Option<f64>) -> String {
    value.map(sig12).unwrap_or_default()
}

pub const RESULTS_HEADER: &str = "criterion,seed,test_accuracy,baseline_accuracy,status";

pub fn results_csv(runs: &[RunRecord]) -> String {
    let mut out = format!("{RESULTS_HEADER}\n");
    for r in runs {
        let status = if r.is_ok() { "ok" } else { "failed" };
        let _ = writeln!(
            out,
            "{},{},{},{},{status}",
            r.criterion,
            r.seed,
            opt(r.test_accuracy),
            opt(r.baseline_accuracy)
        );
    }
    out
}

fn splits_csv(config: &ExperimentConfig, splits: &[SplitRecord]) -> String {
    let mut out = String::from("seed,split_seed,checksum,n_labeled,n_unlabeled,n_test,baseline_accuracy\n");
    for s in splits {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.seed,
            split_seed(s.seed),
            s.checksum.map(|c| format!("{c:016x}")).unwrap_or_default(),
            config.split.n_labeled,
            config.split.n_unlabeled,
            config.split.n_test,
            opt(s.baseline_accuracy)
        );
    }
    out
}
