//! The self-training loop: fit on the labeled data, score every pool
//! candidate, move the argmax (with its pseudo-label) into the labeled set,
//! repeat until the stopping rule fires or the pool is empty.
//!
//! Exactly one point is added per iteration and pseudo-labels are never
//! revised. Candidate scoring may fan out over rayon workers; results are
//! collected in pool order and reduced sequentially, so serial and parallel
//! runs produce identical traces.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use thiserror::Error;

use crate::criteria::{rank_sum_scores, CandidateScore, CriterionSpec, ScoringContext};
use crate::error::{Error, Result};
use crate::glm::{Label, LabeledSet, Learner, ModelFit, UnlabeledPool};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum StoppingRule<T> {
    /// Run until every pool point has been pseudo-labeled.
    #[default]
    ExhaustPool,
    MaxIterations(usize),
    /// Stop as soon as the best candidate scores below the threshold.
    ScoreThreshold(T),
}

impl<T: Scalar> StoppingRule<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            StoppingRule::MaxIterations(0) => {
                Err(Error::InvalidSpec("stopping rule MaxIterations needs k >= 1".into()))
            }
            StoppingRule::ScoreThreshold(t) if !t.is_finite() => {
                Err(Error::InvalidSpec("score threshold must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    pub parallelism: Parallelism,
    /// Start candidate refits from the current labeled-data fit.
    pub warm_start: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            parallelism: Parallelism::Parallel,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep<T> {
    /// 1-based loop iteration.
    pub iteration: usize,
    /// Index of the chosen point in the initial pool.
    pub pool_index: usize,
    pub pseudo_label: Label,
    pub score: T,
    pub labeled_size_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTrace<T> {
    pub steps: Vec<TraceStep<T>>,
}

impl<T> Default for SelectionTrace<T> {
    fn default() -> Self {
        Self { steps: Vec::new() }
    }
}

/// One line of a serialized trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub pool_index: usize,
    pub pseudo_label: Label,
    pub score: f64,
}

pub const TRACE_HEADER: &str = "iteration,pool_index,pseudo_label,score";

/// Formats a real with 12 significant digits.
pub fn format_sig12(value: f64) -> String {
    format!("{value:.11e}")
}

impl<T: Scalar> SelectionTrace<T> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn pool_indices(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.pool_index).collect()
    }

    /// Header line followed by one `iteration,pool_index,pseudo_label,score`
    /// line per step.
    pub fn to_records(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                s.iteration,
                s.pool_index,
                s.pseudo_label,
                format_sig12(s.score.as_f64())
            );
        }
        out
    }
}

pub fn parse_trace_records(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == TRACE_HEADER => {}
        _ => {
            return Err(Error::Parse {
                row: 1,
                column: String::new(),
                message: format!("expected header {TRACE_HEADER:?}"),
            })
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse_err = |column: &str, message: String| Error::Parse {
            row: i + 1,
            column: column.to_string(),
            message,
        };
        if fields.len() != 4 {
            return Err(parse_err("", format!("expected 4 fields, found {}", fields.len())));
        }
        records.push(TraceRecord {
            iteration: fields[0].parse().map_err(|e| parse_err("iteration", format!("{e}")))?,
            pool_index: fields[1].parse().map_err(|e| parse_err("pool_index", format!("{e}")))?,
            pseudo_label: fields[2].parse().map_err(|e| parse_err("pseudo_label", format!("{e}")))?,
            score: fields[3].parse().map_err(|e| parse_err("score", format!("{e}")))?,
        });
    }
    Ok(records)
}

fn check_compatible<T: Scalar>(d: &LabeledSet<T>, u: &UnlabeledPool<T>) -> Result<()> {
    if d.d() != u.d() {
        return Err(Error::DimensionMismatch {
            expected: d.d(),
            found: u.d(),
        });
    }
    Ok(())
}

/// Scores every candidate of `u` given a model already fitted on `d`.
pub fn score_pool_with_fit<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    d: &LabeledSet<T>,
    base_fit: &ModelFit<T>,
    u: &UnlabeledPool<T>,
    spec: &CriterionSpec<T>,
    options: EngineOptions,
) -> Result<Vec<CandidateScore<T>>> {
    let mut ctx = ScoringContext::new(learner, d, base_fit, u.label_space());
    ctx.warm_start = options.warm_start;
    let score_one = |pos: usize| ctx.score(spec, pos, u.row(pos)).map_err(|e| e.at_candidate(pos));
    let mut scores = match options.parallelism {
        Parallelism::Serial => (0..u.m()).map(score_one).collect::<Result<Vec<_>>>()?,
        Parallelism::Parallel => (0..u.m())
            .into_par_iter()
            .map(score_one)
            .collect::<Result<Vec<_>>>()?,
    };
    if spec.uses_rank_sum() {
        let values: Vec<Vec<T>> = scores
            .iter()
            .map(|s| s.objective_values.clone().unwrap_or_default())
            .collect();
        for (s, total) in scores.iter_mut().zip(rank_sum_scores(&values)) {
            s.score = total;
        }
    }
    Ok(scores)
}

/// Fits on `d` once, then scores every pool candidate in pool order.
pub fn score_all_candidates<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    d: &LabeledSet<T>,
    u: &UnlabeledPool<T>,
    spec: &CriterionSpec<T>,
    options: EngineOptions,
) -> Result<Vec<CandidateScore<T>>> {
    if u.is_empty() {
        return Err(Error::EmptyPool);
    }
    check_compatible(d, u)?;
    spec.validate(d.d())?;
    let base = learner.fit(d, &spec.prior)?;
    score_pool_with_fit(learner, d, &base, u, spec, options)
}

/// Highest score; ties go to the smallest pool index.
pub fn select_best<T: Scalar>(scores: &[CandidateScore<T>]) -> Result<&CandidateScore<T>> {
    let mut best: Option<&CandidateScore<T>> = None;
    for s in scores {
        if !s.score.is_finite() {
            return Err(Error::NonFiniteScore {
                index: s.pool_index,
                score: s.score.as_f64(),
            });
        }
        best = match best {
            Some(b) if b.score > s.score || (b.score == s.score && b.pool_index < s.pool_index) => Some(b),
            _ => Some(s),
        };
    }
    best.ok_or(Error::EmptyPool)
}

#[derive(Debug, Clone)]
pub struct RunOutcome<T> {
    /// Model refitted on the final labeled set.
    pub final_fit: ModelFit<T>,
    pub trace: SelectionTrace<T>,
    pub final_labeled: LabeledSet<T>,
    /// Whatever is left of the pool.
    pub remaining: UnlabeledPool<T>,
}

/// A run that stopped on an error, with the steps completed before it.
#[derive(Debug, Clone, Error)]
pub struct EngineFailure<T: fmt::Debug> {
    /// Iteration during which the error occurred (0 for setup failures).
    pub iteration: usize,
    #[source]
    pub error: Error,
    pub partial_trace: SelectionTrace<T>,
}

impl<T: fmt::Debug> fmt::Display for EngineFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pseudo-labeling failed in iteration {} after {} steps: {}",
            self.iteration,
            self.partial_trace.steps.len(),
            self.error
        )
    }
}

/// Runs the self-training loop to completion.
pub fn run_pseudo_labeling<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    d0: &LabeledSet<T>,
    u0: &UnlabeledPool<T>,
    spec: &CriterionSpec<T>,
    stop: StoppingRule<T>,
    options: EngineOptions,
) -> std::result::Result<RunOutcome<T>, EngineFailure<T>> {
    let setup = |error| EngineFailure {
        iteration: 0,
        error,
        partial_trace: SelectionTrace::default(),
    };
    check_compatible(d0, u0).map_err(setup)?;
    spec.validate(d0.d()).map_err(setup)?;
    stop.validate().map_err(setup)?;
    if u0.is_empty() && matches!(stop, StoppingRule::MaxIterations(_)) {
        return Err(setup(Error::EmptyPool));
    }

    let mut labeled = d0.clone();
    let mut pool = u0.clone();
    let mut trace = SelectionTrace::default();
    let mut iteration = 0;
    loop {
        let fail = |error, trace: &SelectionTrace<T>| EngineFailure {
            iteration,
            error,
            partial_trace: trace.clone(),
        };
        let fit = learner.fit(&labeled, &spec.prior).map_err(|e| fail(e, &trace))?;
        let done = pool.is_empty()
            || matches!(stop, StoppingRule::MaxIterations(k) if trace.len() >= k);
        if done {
            return Ok(RunOutcome {
                final_fit: fit,
                trace,
                final_labeled: labeled,
                remaining: pool,
            });
        }
        iteration += 1;
        let fail = |error, trace: &SelectionTrace<T>| EngineFailure {
            iteration,
            error,
            partial_trace: trace.clone(),
        };
        let scores = score_pool_with_fit(learner, &labeled, &fit, &pool, spec, options)
            .map_err(|e| fail(e, &trace))?;
        let best = select_best(&scores).map_err(|e| fail(e, &trace))?;
        if let StoppingRule::ScoreThreshold(t) = stop {
            if best.score < t {
                return Ok(RunOutcome {
                    final_fit: fit,
                    trace,
                    final_labeled: labeled,
                    remaining: pool,
                });
            }
        }
        let (label, score, pos) = (best.pseudo_label, best.score, best.pool_index);
        let (original, row) = pool.remove(pos);
        labeled.push(&row, label).map_err(|e| fail(e, &trace))?;
        trace.steps.push(TraceStep {
            iteration,
            pool_index: original,
            pseudo_label: label,
            score,
            labeled_size_after: labeled.n(),
        });
    }
}
