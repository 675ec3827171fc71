//! Pseudo-label selection criteria `c(x, ŷ)`.
//!
//! Every criterion is oriented so that larger is better; the engine always
//! picks the argmax. The main criterion is the Laplace-approximated joint
//! posterior predictive of the labeled data and one pseudo-labeled candidate,
//!
//! ```text
//! ℓ(θ̂) − ½ log |I(θ̂)|
//! ```
//!
//! where θ̂ is refitted on the augmented data `D ∪ {(x, ŷ)}`, `ℓ` is the data
//! log-likelihood of the augmented set and `I` the information matrix at θ̂
//! (including the prior precision). The constants the Laplace expansion
//! shares across candidates are dropped.
//!
//! Alongside it live two fit-free baselines (confidence and predictive
//! variance), the `ℓ(θ̂)`-only ablation, multi-objective utilities with
//! configurable aggregation, and the optimistic / pessimistic superset
//! wrappers that search over all labels instead of trusting the prediction.
//!
//! Two of the multi-objective utilities are interpretations:
//! [`ObjectiveSpec::LabeledOnlyLikelihood`] scores a candidate by how well
//! the refitted model still explains the originally labeled rows, and
//! [`ObjectiveSpec::WeightedLikelihood`] weights each row's log-likelihood by
//! a caller-supplied importance weight.

use crate::error::{Error, Result};
use crate::glm::{validate_columns, Label, LabeledSet, Learner, ModelFit, PriorSpec};
use crate::numerics::cholesky;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupersetMode {
    /// Max over labels (max-max action).
    Optimistic,
    /// Min over labels (min-max action).
    Pessimistic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Aggregation<T> {
    /// Worst case across objectives.
    Min,
    /// Convex combination; weights are non-negative and sum to one.
    WeightedSum(Vec<T>),
    /// Sum over objectives of each candidate's rank within the pool.
    /// Only meaningful pool-wide, see [`rank_sum_scores`].
    RankSum,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec<T> {
    /// Pseudo posterior predictive of the model restricted to these columns.
    ModelSpec { features: Vec<usize> },
    /// Log-likelihood of the originally labeled rows under the augmented fit.
    LabeledOnlyLikelihood,
    /// `Σ wᵢ ℓᵢ` over the augmented set; the candidate's weight comes last,
    /// so the length must equal the augmented sample size.
    WeightedLikelihood { weights: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CriterionKind<T> {
    PseudoPosteriorPredictive,
    Confidence,
    AugmentedLikelihood,
    PredictiveVariance,
    MultiObjective {
        objectives: Vec<ObjectiveSpec<T>>,
        aggregation: Aggregation<T>,
    },
    Superset {
        inner: Box<CriterionSpec<T>>,
        mode: SupersetMode,
    },
}

impl<T> CriterionKind<T> {
    /// Short machine-friendly name.
    pub fn name(&self) -> &'static str {
        match self {
            CriterionKind::PseudoPosteriorPredictive => "pseudo_posterior_predictive",
            CriterionKind::Confidence => "confidence",
            CriterionKind::AugmentedLikelihood => "augmented_likelihood",
            CriterionKind::PredictiveVariance => "predictive_variance",
            CriterionKind::MultiObjective { .. } => "multi_objective",
            CriterionKind::Superset { .. } => "superset",
        }
    }
}

/// A selection criterion together with the prior used for every fit it makes.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSpec<T> {
    pub kind: CriterionKind<T>,
    pub prior: PriorSpec<T>,
}

impl<T: Scalar> CriterionSpec<T> {
    pub fn new(kind: CriterionKind<T>, prior: PriorSpec<T>) -> Self {
        Self { kind, prior }
    }

    pub fn pseudo_posterior_predictive(prior: PriorSpec<T>) -> Self {
        Self::new(CriterionKind::PseudoPosteriorPredictive, prior)
    }

    pub fn confidence(prior: PriorSpec<T>) -> Self {
        Self::new(CriterionKind::Confidence, prior)
    }

    pub fn augmented_likelihood(prior: PriorSpec<T>) -> Self {
        Self::new(CriterionKind::AugmentedLikelihood, prior)
    }

    pub fn predictive_variance(prior: PriorSpec<T>) -> Self {
        Self::new(CriterionKind::PredictiveVariance, prior)
    }

    pub fn multi_objective(
        objectives: Vec<ObjectiveSpec<T>>,
        aggregation: Aggregation<T>,
        prior: PriorSpec<T>,
    ) -> Self {
        Self::new(CriterionKind::MultiObjective { objectives, aggregation }, prior)
    }

    /// Wraps `inner`; the wrapper reuses the inner prior for its base fit.
    pub fn superset(inner: CriterionSpec<T>, mode: SupersetMode) -> Self {
        let prior = inner.prior;
        Self::new(
            CriterionKind::Superset {
                inner: Box::new(inner),
                mode,
            },
            prior,
        )
    }

    /// Whether scoring needs a refit per candidate.
    pub fn requires_refit(&self) -> bool {
        match &self.kind {
            CriterionKind::Confidence | CriterionKind::PredictiveVariance => false,
            CriterionKind::Superset { inner, .. } => inner.requires_refit(),
            _ => true,
        }
    }

    pub fn uses_rank_sum(&self) -> bool {
        matches!(
            &self.kind,
            CriterionKind::MultiObjective {
                aggregation: Aggregation::RankSum,
                ..
            }
        )
    }

    /// Checks structural invariants against a model of dimension `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        match &self.kind {
            CriterionKind::MultiObjective { objectives, aggregation } => {
                if objectives.len() < 2 {
                    return Err(Error::InvalidSpec(
                        "multi-objective criterion needs at least two objectives".into(),
                    ));
                }
                for obj in objectives {
                    obj.validate(d)?;
                }
                if let Aggregation::WeightedSum(w) = aggregation {
                    if w.len() != objectives.len() {
                        return Err(Error::InvalidSpec(format!(
                            "{} aggregation weights for {} objectives",
                            w.len(),
                            objectives.len()
                        )));
                    }
                    if w.iter().any(|v| !v.is_finite() || *v < T::zero()) {
                        return Err(Error::InvalidSpec("aggregation weights must be non-negative".into()));
                    }
                    let total: T = w.iter().copied().sum();
                    if (total - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) {
                        return Err(Error::InvalidSpec(format!(
                            "aggregation weights sum to {total}, expected 1"
                        )));
                    }
                }
                Ok(())
            }
            CriterionKind::Superset { inner, .. } => {
                if matches!(inner.kind, CriterionKind::Superset { .. }) {
                    return Err(Error::InvalidSpec("superset criteria cannot be nested".into()));
                }
                if inner.uses_rank_sum() {
                    return Err(Error::InvalidSpec(
                        "rank-sum aggregation is pool-level and cannot be wrapped per label".into(),
                    ));
                }
                inner.validate(d)
            }
            _ => Ok(()),
        }
    }
}

impl<T: Scalar> ObjectiveSpec<T> {
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            ObjectiveSpec::ModelSpec { features } => {
                if !features.contains(&0) {
                    return Err(Error::InvalidSpec(
                        "feature subset must contain the intercept column 0".into(),
                    ));
                }
                validate_columns(features, d)
            }
            ObjectiveSpec::LabeledOnlyLikelihood => Ok(()),
            ObjectiveSpec::WeightedLikelihood { weights } => {
                if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w <= T::zero()) {
                    return Err(Error::InvalidSpec(
                        "likelihood weights must be strictly positive and finite".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Score of one pool candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore<T> {
    /// Position in the pool that was scored.
    pub pool_index: usize,
    pub pseudo_label: Label,
    pub score: T,
    /// Raw per-objective values (multi-objective criteria only).
    pub objective_values: Option<Vec<T>>,
}

/// Fits the learner on `d ∪ {(x, y)}`.
pub fn augmented_fit<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    d: &LabeledSet<T>,
    x: &[T],
    y: Label,
    prior: &PriorSpec<T>,
    warm_start: Option<&[T]>,
) -> Result<(LabeledSet<T>, ModelFit<T>)> {
    let augmented = d.with_point(x, y)?;
    let fit = learner.fit_from(&augmented, prior, warm_start)?;
    Ok((augmented, fit))
}

/// `ℓ(θ̂) − ½ log|I(θ̂)|` for an already fitted augmented model.
pub fn laplace_score<T: Scalar>(fit: &ModelFit<T>) -> Result<T> {
    let log_det = cholesky(&fit.fisher)?.log_det();
    Ok(fit.log_lik - T::lit(0.5) * log_det)
}

pub fn pseudo_posterior_predictive<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    d: &LabeledSet<T>,
    x: &[T],
    y: Label,
    prior: &PriorSpec<T>,
) -> Result<T> {
    pseudo_posterior_predictive_from(learner, d, x, y, prior, None)
}

pub fn pseudo_posterior_predictive_from<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    d: &LabeledSet<T>,
    x: &[T],
    y: Label,
    prior: &PriorSpec<T>,
    warm_start: Option<&[T]>,
) -> Result<T> {
    let (_, fit) = augmented_fit(learner, d, x, y, prior, warm_start)?;
    laplace_score(&fit)
}

/// The `ℓ(θ̂)` term of the pseudo posterior predictive on its own.
pub fn augmented_likelihood_score<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    d: &LabeledSet<T>,
    x: &[T],
    y: Label,
    prior: &PriorSpec<T>,
) -> Result<T> {
    augmented_likelihood_score_from(learner, d, x, y, prior, None)
}

pub fn augmented_likelihood_score_from<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    d: &LabeledSet<T>,
    x: &[T],
    y: Label,
    prior: &PriorSpec<T>,
    warm_start: Option<&[T]>,
) -> Result<T> {
    let (_, fit) = augmented_fit(learner, d, x, y, prior, warm_start)?;
    Ok(fit.log_lik)
}

/// Most probable label in `label_space`; ties go to the smaller label.
pub fn predicted_label<T: Scalar>(p_one: T, label_space: &[Label]) -> (T, Label) {
    let mut best: Option<(T, Label)> = None;
    for &label in label_space {
        let p = label_probability(p_one, label);
        best = match best {
            Some((bp, bl)) if bp > p || (bp == p && bl < label) => Some((bp, bl)),
            _ => Some((p, label)),
        };
    }
    best.expect("label space is non-empty")
}

fn label_probability<T: Scalar>(p_one: T, label: Label) -> T {
    if label == 1 {
        p_one
    } else {
        T::one() - p_one
    }
}

/// `(max(p, 1 − p), argmax label)`; `p = 0.5` resolves to label 0.
pub fn confidence_score<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    fit_on_d: &ModelFit<T>,
    x: &[T],
) -> Result<(T, Label)> {
    let p = learner.predict_proba(fit_on_d, x)?;
    Ok(predicted_label(p, &crate::glm::BINARY_LABELS))
}

/// `−p(1 − p)`, so the least uncertain candidate has the largest score.
pub fn predictive_variance_score<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    fit_on_d: &ModelFit<T>,
    x: &[T],
) -> Result<T> {
    let p = learner.predict_proba(fit_on_d, x)?;
    Ok(-(p * (T::one() - p)))
}

/// Values of each objective for the candidate `(x, y)`, in spec order.
pub fn objective_values<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    d: &LabeledSet<T>,
    x: &[T],
    y: Label,
    objectives: &[ObjectiveSpec<T>],
    prior: &PriorSpec<T>,
    warm_start: Option<&[T]>,
) -> Result<Vec<T>> {
    // The full-model augmented fit is shared by the likelihood objectives.
    let mut full: Option<(LabeledSet<T>, ModelFit<T>)> = None;
    let mut values = Vec::with_capacity(objectives.len());
    for obj in objectives {
        obj.validate(d.d())?;
        let value = match obj {
            ObjectiveSpec::ModelSpec { features } => {
                let sub_d = d.select_columns(features)?;
                let sub_x: Vec<T> = features.iter().map(|&c| x[c]).collect();
                let sub_warm: Option<Vec<T>> =
                    warm_start.map(|w| features.iter().map(|&c| w[c]).collect());
                pseudo_posterior_predictive_from(learner, &sub_d, &sub_x, y, prior, sub_warm.as_deref())?
            }
            ObjectiveSpec::LabeledOnlyLikelihood => {
                if full.is_none() {
                    full = Some(augmented_fit(learner, d, x, y, prior, warm_start)?);
                }
                let (_, fit) = full.as_ref().unwrap();
                learner.log_likelihood(&fit.theta, d)?
            }
            ObjectiveSpec::WeightedLikelihood { weights } => {
                if weights.len() != d.n() + 1 {
                    return Err(Error::InvalidSpec(format!(
                        "{} likelihood weights for an augmented set of {} rows",
                        weights.len(),
                        d.n() + 1
                    )));
                }
                if full.is_none() {
                    full = Some(augmented_fit(learner, d, x, y, prior, warm_start)?);
                }
                let (augmented, fit) = full.as_ref().unwrap();
                learner
                    .pointwise_log_likelihood(&fit.theta, augmented)?
                    .iter()
                    .zip(weights)
                    .map(|(&l, &w)| w * l)
                    .sum()
            }
        };
        values.push(value);
    }
    Ok(values)
}

/// Aggregates one candidate's objective values. Rank-sum yields the `0`
/// placeholder; the pool-level pass replaces it.
pub fn aggregate<T: Scalar>(values: &[T], aggregation: &Aggregation<T>) -> T {
    match aggregation {
        Aggregation::Min => values.iter().copied().fold(T::infinity(), T::min),
        Aggregation::WeightedSum(w) => values.iter().zip(w).map(|(&v, &w)| v * w).sum(),
        Aggregation::RankSum => T::zero(),
    }
}

/// Rank-sum scores across a pool: for every objective, candidates are ranked
/// ascending (1 = worst, ties share their average rank) and the ranks summed.
pub fn rank_sum_scores<T: Scalar>(values: &[Vec<T>]) -> Vec<T> {
    let m = values.len();
    let k = values.first().map_or(0, Vec::len);
    let mut totals = vec![T::zero(); m];
    for obj in 0..k {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            values[a][obj]
                .partial_cmp(&values[b][obj])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut start = 0;
        while start < m {
            let mut end = start + 1;
            while end < m && values[order[end]][obj] == values[order[start]][obj] {
                end += 1;
            }
            // Ranks start..end (0-based) share the mean rank, 1-based.
            let rank = T::from_usize(start + end + 1).unwrap() / T::lit(2.0);
            for &i in &order[start..end] {
                totals[i] += rank;
            }
            start = end;
        }
    }
    totals
}

pub fn multi_objective_score<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    d: &LabeledSet<T>,
    x: &[T],
    y: Label,
    spec: &CriterionSpec<T>,
    warm_start: Option<&[T]>,
) -> Result<CandidateScore<T>> {
    let CriterionKind::MultiObjective { objectives, aggregation } = &spec.kind else {
        return Err(Error::InvalidSpec("expected a multi-objective criterion".into()));
    };
    spec.validate(d.d())?;
    let values = objective_values(learner, d, x, y, objectives, &spec.prior, warm_start)?;
    Ok(CandidateScore {
        pool_index: 0,
        pseudo_label: y,
        score: aggregate(&values, aggregation),
        objective_values: Some(values),
    })
}

/// Everything needed to score candidates against one labeled set: the
/// learner, the data and the model fitted on it.
///
/// The base fit supplies pseudo-labels, the fit-free baselines and the warm
/// start for every candidate refit.
pub struct ScoringContext<'a, T, L: ?Sized> {
    pub learner: &'a L,
    pub labeled: &'a LabeledSet<T>,
    pub base_fit: &'a ModelFit<T>,
    pub label_space: &'a [Label],
    pub warm_start: bool,
}

impl<'a, T: Scalar, L: Learner<T> + ?Sized> ScoringContext<'a, T, L> {
    pub fn new(
        learner: &'a L,
        labeled: &'a LabeledSet<T>,
        base_fit: &'a ModelFit<T>,
        label_space: &'a [Label],
    ) -> Self {
        Self {
            learner,
            labeled,
            base_fit,
            label_space,
            warm_start: true,
        }
    }

    fn warm(&self) -> Option<&[T]> {
        self.warm_start.then_some(self.base_fit.theta.as_slice())
    }

    /// Criterion value for the candidate `x` at a fixed label `y`.
    pub fn value_at(&self, spec: &CriterionSpec<T>, x: &[T], y: Label) -> Result<(T, Option<Vec<T>>)> {
        let learner = self.learner;
        let prior = &spec.prior;
        match &spec.kind {
            CriterionKind::PseudoPosteriorPredictive => Ok((
                pseudo_posterior_predictive_from(learner, self.labeled, x, y, prior, self.warm())?,
                None,
            )),
            CriterionKind::AugmentedLikelihood => Ok((
                augmented_likelihood_score_from(learner, self.labeled, x, y, prior, self.warm())?,
                None,
            )),
            CriterionKind::Confidence => {
                let p = learner.predict_proba(self.base_fit, x)?;
                Ok((label_probability(p, y), None))
            }
            CriterionKind::PredictiveVariance => {
                Ok((predictive_variance_score(learner, self.base_fit, x)?, None))
            }
            CriterionKind::MultiObjective { .. } => {
                let s = multi_objective_score(learner, self.labeled, x, y, spec, self.warm())?;
                Ok((s.score, s.objective_values))
            }
            CriterionKind::Superset { .. } => {
                Err(Error::InvalidSpec("superset criteria have no fixed-label value".into()))
            }
        }
    }

    /// Scores the candidate at pool position `pool_index`.
    ///
    /// The pseudo-label is the base model's prediction, except for superset
    /// criteria, which search the whole label space.
    pub fn score(&self, spec: &CriterionSpec<T>, pool_index: usize, x: &[T]) -> Result<CandidateScore<T>> {
        if let CriterionKind::Superset { inner, mode } = &spec.kind {
            let (score, label, values) = self.superset(inner, *mode, x)?;
            return Ok(CandidateScore {
                pool_index,
                pseudo_label: label,
                score,
                objective_values: values,
            });
        }
        let p = self.learner.predict_proba(self.base_fit, x)?;
        let (_, label) = predicted_label(p, self.label_space);
        let (score, objective_values) = self.value_at(spec, x, label)?;
        Ok(CandidateScore {
            pool_index,
            pseudo_label: label,
            score,
            objective_values,
        })
    }

    fn superset(
        &self,
        inner: &CriterionSpec<T>,
        mode: SupersetMode,
        x: &[T],
    ) -> Result<(T, Label, Option<Vec<T>>)> {
        let mut evaluated = Vec::with_capacity(self.label_space.len());
        for &y in self.label_space {
            let (value, objectives) = self.value_at(inner, x, y)?;
            evaluated.push((y, value, objectives));
        }
        let pairs: Vec<(Label, T)> = evaluated.iter().map(|(y, v, _)| (*y, *v)).collect();
        let (score, label) = superset_choice(&pairs, mode)
            .ok_or_else(|| Error::InvalidData("label space is empty".into()))?;
        let objectives = evaluated.into_iter().find(|(y, _, _)| *y == label).and_then(|e| e.2);
        Ok((score, label, objectives))
    }
}

/// Max (optimistic) or min (pessimistic) of per-label criterion values.
/// Equal values resolve to the smaller label.
pub fn superset_choice<T: Scalar>(values: &[(Label, T)], mode: SupersetMode) -> Option<(T, Label)> {
    let mut best: Option<(T, Label)> = None;
    for &(label, value) in values {
        let replace = match best {
            None => true,
            Some((b, bl)) => {
                let strictly = match mode {
                    SupersetMode::Optimistic => value > b,
                    SupersetMode::Pessimistic => value < b,
                };
                strictly || (value == b && label < bl)
            }
        };
        if replace {
            best = Some((value, label));
        }
    }
    best
}

/// Superset score of `x`: the inner criterion searched over every label.
pub fn superset_score<T: Scalar, L: Learner<T> + ?Sized>(
    learner: &L,
    d: &LabeledSet<T>,
    x: &[T],
    label_space: &[Label],
    spec: &CriterionSpec<T>,
) -> Result<(T, Label)> {
    if !matches!(spec.kind, CriterionKind::Superset { .. }) {
        return Err(Error::InvalidSpec("expected a superset criterion".into()));
    }
    spec.validate(d.d())?;
    let base = learner.fit(d, &spec.prior)?;
    let ctx = ScoringContext::new(learner, d, &base, label_space);
    let s = ctx.score(spec, 0, x)?;
    Ok((s.score, s.pseudo_label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glm::{LogisticRegression, BINARY_LABELS};

    fn intercept_only(y: &[Label]) -> LabeledSet<f64> {
        LabeledSet::new(vec![vec![1.0]; y.len()], y.to_vec()).unwrap()
    }

    fn lr() -> LogisticRegression<f64> {
        LogisticRegression::default()
    }

    #[test]
    fn balanced_augmented_set_scores_four_log_half() {
        let d = intercept_only(&[1, 0, 1]);
        let v = pseudo_posterior_predictive(&lr(), &d, &[1.0], 0, &PriorSpec::flat()).unwrap();
        assert!((v - 4.0 * 0.5f64.ln()).abs() < 1e-12);
        assert!((v + 2.772589).abs() < 1e-6);
        let a = augmented_likelihood_score(&lr(), &d, &[1.0], 0, &PriorSpec::flat()).unwrap();
        assert!((a + 2.772589).abs() < 1e-6);
    }

    #[test]
    fn three_to_one_matches_hand_computation() {
        // Intercept-only MLE with 3 ones and 1 zero: p̂ = 3/4, θ̂ = log 3,
        // information 4·(3/4)(1/4) = 3/4.
        let d = intercept_only(&[1, 0, 1]);
        let ll = 3.0 * 0.75f64.ln() + 0.25f64.ln();
        let expected = ll - 0.5 * 0.75f64.ln();
        let v = pseudo_posterior_predictive(&lr(), &d, &[1.0], 1, &PriorSpec::flat()).unwrap();
        assert!((v - expected).abs() < 1e-10, "{v} vs {expected}");
        let a = augmented_likelihood_score(&lr(), &d, &[1.0], 1, &PriorSpec::flat()).unwrap();
        assert!((a - ll).abs() < 1e-10);
    }

    #[test]
    fn confidence_and_variance_baselines() {
        let d = intercept_only(&[1, 0]);
        let mut fit = lr().fit(&d, &PriorSpec::flat()).unwrap();
        assert_eq!(confidence_score(&lr(), &fit, &[1.0]).unwrap(), (0.5, 0));
        assert_eq!(predictive_variance_score(&lr(), &fit, &[1.0]).unwrap(), -0.25);

        fit.theta = vec![(0.9f64 / 0.1).ln()];
        let (c, l) = confidence_score(&lr(), &fit, &[1.0]).unwrap();
        assert!((c - 0.9).abs() < 1e-12 && l == 1);
        assert!((predictive_variance_score(&lr(), &fit, &[1.0]).unwrap() + 0.09).abs() < 1e-12);

        fit.theta = vec![(0.2f64 / 0.8).ln()];
        let (c, l) = confidence_score(&lr(), &fit, &[1.0]).unwrap();
        assert!((c - 0.8).abs() < 1e-12 && l == 0);
        assert!(confidence_score(&lr(), &fit, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn aggregation_arithmetic() {
        let v = [-3.0, -2.0];
        assert_eq!(aggregate(&v, &Aggregation::Min), -3.0);
        assert_eq!(aggregate(&v, &Aggregation::WeightedSum(vec![0.5, 0.5])), -2.5);
        assert_eq!(aggregate(&v, &Aggregation::RankSum), 0.0);
    }

    #[test]
    fn rank_sum_uses_average_ranks() {
        let values = vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![2.0, 4.0]];
        // Objective 0 ranks: 1, 2.5, 2.5; objective 1 ranks: 2.5, 2.5, 1.
        assert_eq!(rank_sum_scores(&values), vec![3.5, 5.0, 3.5]);
    }

    #[test]
    fn identical_model_objectives_reduce_to_single_criterion() {
        let d = LabeledSet::new(
            vec![vec![1.0, 0.2], vec![1.0, -1.0], vec![1.0, 1.4], vec![1.0, 0.1]],
            vec![1, 0, 1, 0],
        )
        .unwrap();
        let prior = PriorSpec::new(1.0).unwrap();
        let full = ObjectiveSpec::ModelSpec { features: vec![0, 1] };
        let spec = CriterionSpec::multi_objective(vec![full.clone(), full], Aggregation::Min, prior);
        let s = multi_objective_score(&lr(), &d, &[1.0, 0.5], 1, &spec, None).unwrap();
        let single = pseudo_posterior_predictive(&lr(), &d, &[1.0, 0.5], 1, &prior).unwrap();
        assert_eq!(s.score, single);
        assert_eq!(s.objective_values.unwrap(), vec![single, single]);
    }

    #[test]
    fn labeled_only_and_weighted_objectives() {
        let d = LabeledSet::new(
            vec![vec![1.0, 0.2], vec![1.0, -1.0], vec![1.0, 1.4]],
            vec![1, 0, 1],
        )
        .unwrap();
        let prior = PriorSpec::new(1.0).unwrap();
        let x = [1.0, -0.3];
        let (aug, fit) = augmented_fit(&lr(), &d, &x, 0, &prior, None).unwrap();
        let pointwise = lr().pointwise_log_likelihood(&fit.theta, &aug).unwrap();
        let objectives = vec![
            ObjectiveSpec::LabeledOnlyLikelihood,
            ObjectiveSpec::WeightedLikelihood {
                weights: vec![1.0, 1.0, 1.0, 0.25],
            },
        ];
        let v = objective_values(&lr(), &d, &x, 0, &objectives, &prior, None).unwrap();
        let labeled_only: f64 = pointwise[..3].iter().sum();
        assert!((v[0] - labeled_only).abs() < 1e-12);
        assert!((v[1] - (labeled_only + 0.25 * pointwise[3])).abs() < 1e-12);

        let bad = vec![ObjectiveSpec::WeightedLikelihood { weights: vec![1.0; 3] }];
        assert!(matches!(
            objective_values(&lr(), &d, &x, 0, &bad, &prior, None),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn spec_validation() {
        let prior = PriorSpec::<f64>::flat();
        let one = CriterionSpec::multi_objective(
            vec![ObjectiveSpec::LabeledOnlyLikelihood],
            Aggregation::Min,
            prior,
        );
        assert!(one.validate(2).is_err());
        let no_intercept = CriterionSpec::multi_objective(
            vec![
                ObjectiveSpec::ModelSpec { features: vec![1] },
                ObjectiveSpec::LabeledOnlyLikelihood,
            ],
            Aggregation::Min,
            prior,
        );
        assert!(no_intercept.validate(2).is_err());
        let bad_weights = CriterionSpec::multi_objective(
            vec![ObjectiveSpec::LabeledOnlyLikelihood, ObjectiveSpec::LabeledOnlyLikelihood],
            Aggregation::WeightedSum(vec![0.5, 0.6]),
            prior,
        );
        assert!(bad_weights.validate(2).is_err());
        let nested = CriterionSpec::superset(
            CriterionSpec::superset(CriterionSpec::confidence(prior), SupersetMode::Optimistic),
            SupersetMode::Pessimistic,
        );
        assert!(nested.validate(2).is_err());
        let out_of_range = CriterionSpec::multi_objective(
            vec![
                ObjectiveSpec::ModelSpec { features: vec![0, 3] },
                ObjectiveSpec::LabeledOnlyLikelihood,
            ],
            Aggregation::Min,
            prior,
        );
        assert!(out_of_range.validate(2).is_err());
    }

    #[test]
    fn superset_choice_examples() {
        let values = [(0, -3.1), (1, -2.9)];
        assert_eq!(superset_choice(&values, SupersetMode::Optimistic), Some((-2.9, 1)));
        assert_eq!(superset_choice(&values, SupersetMode::Pessimistic), Some((-3.1, 0)));
        let tied = [(1, -1.0), (0, -1.0)];
        assert_eq!(superset_choice(&tied, SupersetMode::Optimistic), Some((-1.0, 0)));
        assert_eq!(superset_choice::<f64>(&[], SupersetMode::Optimistic), None);
    }

    #[test]
    fn superset_on_symmetric_data_ties_to_label_zero() {
        let d = intercept_only(&[1, 0, 1, 0]);
        let prior = PriorSpec::new(1.0).unwrap();
        for mode in [SupersetMode::Optimistic, SupersetMode::Pessimistic] {
            let spec = CriterionSpec::superset(CriterionSpec::pseudo_posterior_predictive(prior), mode);
            let (_, label) = superset_score(&lr(), &d, &[1.0], &BINARY_LABELS, &spec).unwrap();
            assert_eq!(label, 0);
        }
    }

    #[test]
    fn superset_picks_extremes() {
        let d = LabeledSet::new(
            vec![vec![1.0, 0.2], vec![1.0, -1.0], vec![1.0, 1.4], vec![1.0, 0.9]],
            vec![1, 0, 1, 0],
        )
        .unwrap();
        let prior = PriorSpec::new(1.0).unwrap();
        let x = [1.0, 2.0];
        let v0 = pseudo_posterior_predictive(&lr(), &d, &x, 0, &prior).unwrap();
        let v1 = pseudo_posterior_predictive(&lr(), &d, &x, 1, &prior).unwrap();
        let inner = CriterionSpec::pseudo_posterior_predictive(prior);
        let opt = superset_score(
            &lr(),
            &d,
            &x,
            &BINARY_LABELS,
            &CriterionSpec::superset(inner.clone(), SupersetMode::Optimistic),
        )
        .unwrap();
        let pes = superset_score(
            &lr(),
            &d,
            &x,
            &BINARY_LABELS,
            &CriterionSpec::superset(inner, SupersetMode::Pessimistic),
        )
        .unwrap();
        assert!((opt.0 - v0.max(v1)).abs() < 1e-9);
        assert!((pes.0 - v0.min(v1)).abs() < 1e-9);
        assert_eq!(opt.1, if v1 > v0 { 1 } else { 0 });
        assert_eq!(pes.1, if v1 > v0 { 0 } else { 1 });
    }
}
