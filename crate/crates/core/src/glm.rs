//! Binary logistic regression fitted by Newton/IRLS with an optional isotropic
//! Gaussian prior, plus the [`Learner`] interface the criteria are written
//! against.
//!
//! The model is `P(y = 1 | x) = σ(θᵀx)`. With prior precision `λ` the fit
//! maximizes the penalized objective
//!
//! ```text
//! Σᵢ [yᵢ log pᵢ + (1 − yᵢ) log(1 − pᵢ)] − (λ/2)‖θ‖²
//! ```
//!
//! starting from `θ = 0` (or a caller-supplied warm start). The intercept is
//! an ordinary column of ones and is penalized like every other coefficient,
//! which differs from the common convention of leaving it unpenalized but
//! keeps the information matrix aligned one-to-one with the parameter vector.
//!
//! The information matrix returned by [`fisher_information`] is
//! `Σᵢ pᵢ(1 − pᵢ) xᵢxᵢᵀ + λI`. Because the logit is the canonical link of the
//! Bernoulli family the Hessian of the log-likelihood does not depend on `y`,
//! so observed and expected information coincide and there is only one
//! matrix to report.

use crate::error::{Error, Result};
use crate::numerics::{cholesky, SpdMatrix};
use crate::scalar::{dot, max_abs, Scalar};

pub type Label = u8;

/// Label space of the binary model.
pub const BINARY_LABELS: [Label; 2] = [0, 1];

/// Iteration cap for the Newton solver.
pub const MAX_ITERATIONS: usize = 100;
/// Step halvings tried before a Newton step is given up on.
pub const MAX_HALVINGS: usize = 20;

/// Predicted probabilities are clamped into `[ε, 1 − ε]` with this `ε`.
pub fn probability_clamp<T: Scalar>() -> T {
    // 1 - 1e-12 rounds to 1 in single precision.
    if T::epsilon() > T::lit(1e-12) {
        T::lit(1e-7)
    } else {
        T::lit(1e-12)
    }
}

/// Labeled data: design matrix rows and binary labels.
///
/// By default every row must start with the intercept constant `1`. Models
/// without a constant term can be built with [`LabeledSet::without_intercept`].
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet<T> {
    x: Vec<T>,
    y: Vec<Label>,
    d: usize,
    intercept: bool,
}

impl<T: Scalar> LabeledSet<T> {
    pub fn new(rows: Vec<Vec<T>>, y: Vec<Label>) -> Result<Self> {
        Self::build(rows, y, true)
    }

    pub fn without_intercept(rows: Vec<Vec<T>>, y: Vec<Label>) -> Result<Self> {
        Self::build(rows, y, false)
    }

    fn build(rows: Vec<Vec<T>>, y: Vec<Label>, intercept: bool) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidData("labeled set needs at least one row".into()));
        }
        if rows.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: y.len(),
            });
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::InvalidData("feature dimension must be positive".into()));
        }
        let mut out = Self {
            x: Vec::with_capacity(rows.len() * d),
            y: Vec::with_capacity(rows.len()),
            d,
            intercept,
        };
        for (row, label) in rows.iter().zip(y) {
            out.push(row, label)?;
        }
        Ok(out)
    }

    /// Appends one row, validating dimension, intercept and label.
    pub fn push(&mut self, row: &[T], label: Label) -> Result<()> {
        check_row(row, self.d, self.intercept)?;
        if label > 1 {
            return Err(Error::InvalidData(format!("label {label} is not in {{0, 1}}")));
        }
        self.x.extend_from_slice(row);
        self.y.push(label);
        Ok(())
    }

    /// Returns a copy with one extra row appended.
    pub fn with_point(&self, row: &[T], label: Label) -> Result<Self> {
        let mut out = self.clone();
        out.push(row, label)?;
        Ok(out)
    }

    /// Restricts the design to the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        validate_columns(columns, self.d)?;
        let mut x = Vec::with_capacity(self.n() * columns.len());
        for row in self.rows() {
            x.extend(columns.iter().map(|&c| row[c]));
        }
        Ok(Self {
            x,
            y: self.y.clone(),
            d: columns.len(),
            intercept: self.intercept && columns.first() == Some(&0),
        })
    }

    /// Reorders rows so that row `k` of the result is row `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut x = Vec::with_capacity(self.x.len());
        let mut y = Vec::with_capacity(self.y.len());
        for &i in order {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        Self { x, y, d: self.d, intercept: self.intercept }
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.x.chunks(self.d)
    }

    pub fn label(&self, i: usize) -> Label {
        self.y[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.y
    }
}

/// Unlabeled candidates together with the label space they may be assigned.
///
/// Each row keeps the index it had in the original pool so that removals do
/// not lose provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledPool<T> {
    x: Vec<T>,
    ids: Vec<usize>,
    d: usize,
    intercept: bool,
    label_space: Vec<Label>,
}

impl<T: Scalar> UnlabeledPool<T> {
    /// Binary pool with label space `(0, 1)` and intercept-led rows.
    pub fn new(rows: Vec<Vec<T>>, d: usize) -> Result<Self> {
        Self::with_label_space(rows, d, BINARY_LABELS.to_vec(), true)
    }

    pub fn without_intercept(rows: Vec<Vec<T>>, d: usize) -> Result<Self> {
        Self::with_label_space(rows, d, BINARY_LABELS.to_vec(), false)
    }

    pub fn with_label_space(
        rows: Vec<Vec<T>>,
        d: usize,
        label_space: Vec<Label>,
        intercept: bool,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidData("feature dimension must be positive".into()));
        }
        if label_space.is_empty() {
            return Err(Error::InvalidData("label space is empty".into()));
        }
        for (k, l) in label_space.iter().enumerate() {
            if *l > 1 {
                return Err(Error::InvalidData(format!("label {l} is not binary")));
            }
            if label_space[..k].contains(l) {
                return Err(Error::InvalidData(format!("duplicate label {l}")));
            }
        }
        let mut x = Vec::with_capacity(rows.len() * d);
        for row in &rows {
            check_row(row, d, intercept)?;
            x.extend_from_slice(row);
        }
        Ok(Self {
            x,
            ids: (0..rows.len()).collect(),
            d,
            intercept,
            label_space,
        })
    }

    pub fn m(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    pub fn label_space(&self) -> &[Label] {
        &self.label_space
    }

    #[inline]
    pub fn row(&self, pos: usize) -> &[T] {
        &self.x[pos * self.d..(pos + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.x.chunks(self.d)
    }

    /// Index of the row at `pos` in the pool this one was derived from.
    pub fn original_index(&self, pos: usize) -> usize {
        self.ids[pos]
    }

    pub fn original_indices(&self) -> &[usize] {
        &self.ids
    }

    /// Removes the row at `pos`, returning its original index and features.
    pub fn remove(&mut self, pos: usize) -> (usize, Vec<T>) {
        let row = self.x.drain(pos * self.d..(pos + 1) * self.d).collect();
        (self.ids.remove(pos), row)
    }
}

fn check_row<T: Scalar>(row: &[T], d: usize, intercept: bool) -> Result<()> {
    if row.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: row.len(),
        });
    }
    if intercept && row[0] != T::one() {
        return Err(Error::InvalidData(format!(
            "first column must be the intercept constant 1, found {}",
            row[0]
        )));
    }
    if row.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite feature value".into()));
    }
    Ok(())
}

pub(crate) fn validate_columns(columns: &[usize], d: usize) -> Result<()> {
    if columns.is_empty() {
        return Err(Error::InvalidSpec("feature subset is empty".into()));
    }
    for (k, &c) in columns.iter().enumerate() {
        if c >= d {
            return Err(Error::InvalidSpec(format!("feature index {c} out of range for d = {d}")));
        }
        if columns[..k].contains(&c) {
            return Err(Error::InvalidSpec(format!("duplicate feature index {c}")));
        }
    }
    Ok(())
}

/// Gaussian prior `θ ~ N(0, λ⁻¹I)`; `λ = 0` is the flat prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec<T> {
    precision: T,
}

impl<T: Scalar> PriorSpec<T> {
    pub fn new(precision: T) -> Result<Self> {
        if !precision.is_finite() || precision < T::zero() {
            return Err(Error::InvalidSpec(format!(
                "prior precision must be finite and non-negative, got {precision}"
            )));
        }
        Ok(Self { precision })
    }

    pub fn flat() -> Self {
        Self { precision: T::zero() }
    }

    pub fn precision(&self) -> T {
        self.precision
    }

    pub fn is_flat(&self) -> bool {
        self.precision == T::zero()
    }
}

impl<T: Scalar> Default for PriorSpec<T> {
    fn default() -> Self {
        Self::flat()
    }
}

/// Result of fitting a learner.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFit<T> {
    /// Penalized maximizer θ̂ (the MAP estimate when a prior is set).
    pub theta: Vec<T>,
    /// Data log-likelihood at θ̂, prior term excluded.
    pub log_lik: T,
    /// Negative Hessian of the penalized objective at θ̂.
    pub fisher: SpdMatrix<T>,
    pub converged: bool,
    /// Newton steps taken.
    pub iterations: usize,
}

impl<T: Scalar> ModelFit<T> {
    pub fn d(&self) -> usize {
        self.theta.len()
    }
}

/// Operations a model must provide to be used by the selection criteria.
pub trait Learner<T: Scalar>: Sync {
    /// Fits on `data`, starting the optimizer from `start` when given.
    fn fit_from(
        &self,
        data: &LabeledSet<T>,
        prior: &PriorSpec<T>,
        start: Option<&[T]>,
    ) -> Result<ModelFit<T>>;

    fn fit(&self, data: &LabeledSet<T>, prior: &PriorSpec<T>) -> Result<ModelFit<T>> {
        self.fit_from(data, prior, None)
    }

    /// `P(y = 1 | x)` under the fitted model.
    fn predict_proba(&self, fit: &ModelFit<T>, x: &[T]) -> Result<T>;

    /// Per-row log-likelihood contributions, in row order.
    fn pointwise_log_likelihood(&self, theta: &[T], data: &LabeledSet<T>) -> Result<Vec<T>>;

    fn log_likelihood(&self, theta: &[T], data: &LabeledSet<T>) -> Result<T> {
        Ok(self.pointwise_log_likelihood(theta, data)?.into_iter().sum())
    }

    fn fisher_information(
        &self,
        theta: &[T],
        data: &LabeledSet<T>,
        prior: &PriorSpec<T>,
    ) -> Result<SpdMatrix<T>>;
}

/// Newton/IRLS logistic regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticRegression<T> {
    /// ∞-norm gradient tolerance for convergence.
    pub gradient_tolerance: T,
    /// ∞-norm bound on the last Newton step for convergence. A vanishing
    /// gradient with a non-vanishing step is the signature of separated data.
    pub step_tolerance: T,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl<T: Scalar> Default for LogisticRegression<T> {
    fn default() -> Self {
        Self {
            gradient_tolerance: T::lit(T::GRADIENT_TOLERANCE),
            step_tolerance: T::lit(T::STEP_TOLERANCE),
            max_iterations: MAX_ITERATIONS,
            max_halvings: MAX_HALVINGS,
        }
    }
}

/// Numerically stable, clamped logistic function.
pub fn sigmoid<T: Scalar>(z: T) -> T {
    let p = if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    };
    let eps = probability_clamp::<T>();
    p.max(eps).min(T::one() - eps)
}

/// Probability the model assigns to the observed label, `σ(±θᵀx)`.
///
/// Working with the label margin keeps label-flipped problems exact mirrors
/// of each other in floating point.
#[inline]
fn label_prob<T: Scalar>(eta: T, y: Label) -> T {
    sigmoid(if y == 1 { eta } else { -eta })
}

fn check_theta<T>(theta: &[T], d: usize) -> Result<()> {
    if theta.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: theta.len(),
        });
    }
    Ok(())
}

/// Penalized objective, its gradient and the penalized information matrix at
/// `theta`, computed in one pass over the data.
struct Evaluation<T> {
    log_lik: T,
    objective: T,
    gradient: Vec<T>,
    information: SpdMatrix<T>,
}

fn evaluate<T: Scalar>(theta: &[T], data: &LabeledSet<T>, prior: &PriorSpec<T>) -> Evaluation<T> {
    let d = data.d();
    let lambda = prior.precision();
    let mut log_lik = T::zero();
    let mut gradient = vec![T::zero(); d];
    let mut upper = vec![T::zero(); d * d];
    for (row, &y) in data.rows().zip(data.labels()) {
        let q = label_prob(dot(theta, row), y);
        log_lik += q.ln();
        // y − p, written through the observed-label probability.
        let resid = if y == 1 { T::one() - q } else { q - T::one() };
        let w = q * (T::one() - q);
        for j in 0..d {
            gradient[j] += resid * row[j];
            let wj = w * row[j];
            for k in j..d {
                upper[j * d + k] += wj * row[k];
            }
        }
    }
    let half = T::lit(0.5);
    let penalty = half * lambda * dot(theta, theta);
    for j in 0..d {
        gradient[j] -= lambda * theta[j];
        upper[j * d + j] += lambda;
    }
    Evaluation {
        log_lik,
        objective: log_lik - penalty,
        gradient,
        information: SpdMatrix::from_upper(d, upper),
    }
}

/// Extra full Newton steps once the tolerance is met. Inside the quadratic
/// region each one squares the remaining error, so a few steps take θ̂ to
/// working precision and make the result independent of the starting point.
fn polish<T: Scalar>(
    mut theta: Vec<T>,
    mut eval: Evaluation<T>,
    mut step: Vec<T>,
    data: &LabeledSet<T>,
    prior: &PriorSpec<T>,
) -> (Vec<T>, Evaluation<T>) {
    const POLISH_STEPS: usize = 3;
    for _ in 0..POLISH_STEPS {
        let grad = max_abs(&eval.gradient);
        if grad == T::zero() {
            break;
        }
        let trial: Vec<T> = theta.iter().zip(&step).map(|(&t, &s)| t + s).collect();
        let next = evaluate(&trial, data, prior);
        if max_abs(&next.gradient) >= grad {
            break;
        }
        let Ok(factor) = cholesky(&next.information) else {
            break;
        };
        let Ok(next_step) = factor.solve(&next.gradient) else {
            break;
        };
        theta = trial;
        eval = next;
        step = next_step;
    }
    (theta, eval)
}

fn penalized_objective<T: Scalar>(theta: &[T], data: &LabeledSet<T>, prior: &PriorSpec<T>) -> T {
    let ll: T = data
        .rows()
        .zip(data.labels())
        .map(|(row, &y)| label_prob(dot(theta, row), y).ln())
        .sum();
    ll - T::lit(0.5) * prior.precision() * dot(theta, theta)
}

impl<T: Scalar> Learner<T> for LogisticRegression<T> {
    fn fit_from(
        &self,
        data: &LabeledSet<T>,
        prior: &PriorSpec<T>,
        start: Option<&[T]>,
    ) -> Result<ModelFit<T>> {
        let d = data.d();
        let mut theta = match start {
            Some(s) => {
                check_theta(s, d)?;
                s.to_vec()
            }
            None => vec![T::zero(); d],
        };
        // Under a flat prior a singular information matrix or an exhausted
        // iteration budget both mean the maximizer does not exist.
        let diverged = |iterations| Error::Diverged { iterations };
        let mut iterations = 0;
        loop {
            let eval = evaluate(&theta, data, prior);
            let factor = match cholesky(&eval.information) {
                Ok(f) => f,
                Err(_) if prior.is_flat() => return Err(diverged(iterations)),
                Err(e) => return Err(e),
            };
            let step = factor.solve(&eval.gradient)?;
            let converged = max_abs(&eval.gradient) < self.gradient_tolerance
                && max_abs(&step) < self.step_tolerance;
            if converged {
                let (theta, eval) = polish(theta, eval, step, data, prior);
                return Ok(ModelFit {
                    theta,
                    log_lik: eval.log_lik,
                    fisher: eval.information,
                    converged: true,
                    iterations,
                });
            }
            if iterations >= self.max_iterations {
                if prior.is_flat() {
                    return Err(diverged(iterations));
                }
                return Ok(ModelFit {
                    theta,
                    log_lik: eval.log_lik,
                    fisher: eval.information,
                    converged: false,
                    iterations,
                });
            }

            let mut scale = T::one();
            let mut accepted = None;
            for _ in 0..=self.max_halvings {
                let trial: Vec<T> = theta.iter().zip(&step).map(|(&t, &s)| t + scale * s).collect();
                if penalized_objective(&trial, data, prior) >= eval.objective {
                    accepted = Some(trial);
                    break;
                }
                scale *= T::lit(0.5);
            }
            iterations += 1;
            match accepted {
                Some(next) => theta = next,
                None => {
                    // No ascent along the Newton direction: stalled at floating
                    // point resolution.
                    if prior.is_flat() {
                        return Err(diverged(iterations));
                    }
                    return Ok(ModelFit {
                        theta,
                        log_lik: eval.log_lik,
                        fisher: eval.information,
                        converged: false,
                        iterations,
                    });
                }
            }
        }
    }

    fn predict_proba(&self, fit: &ModelFit<T>, x: &[T]) -> Result<T> {
        check_theta(x, fit.d())?;
        Ok(sigmoid(dot(&fit.theta, x)))
    }

    fn pointwise_log_likelihood(&self, theta: &[T], data: &LabeledSet<T>) -> Result<Vec<T>> {
        check_theta(theta, data.d())?;
        Ok(data
            .rows()
            .zip(data.labels())
            .map(|(row, &y)| label_prob(dot(theta, row), y).ln())
            .collect())
    }

    fn fisher_information(
        &self,
        theta: &[T],
        data: &LabeledSet<T>,
        prior: &PriorSpec<T>,
    ) -> Result<SpdMatrix<T>> {
        check_theta(theta, data.d())?;
        Ok(evaluate(theta, data, prior).information)
    }
}

/// Gradient of the penalized objective, exposed for diagnostics and tests.
pub fn penalized_gradient<T: Scalar>(
    theta: &[T],
    data: &LabeledSet<T>,
    prior: &PriorSpec<T>,
) -> Result<Vec<T>> {
    check_theta(theta, data.d())?;
    Ok(evaluate(theta, data, prior).gradient)
}

/// Value of the penalized objective `ℓ(θ) − (λ/2)‖θ‖²`.
pub fn penalized_log_posterior<T: Scalar>(
    theta: &[T],
    data: &LabeledSet<T>,
    prior: &PriorSpec<T>,
) -> Result<T> {
    check_theta(theta, data.d())?;
    Ok(penalized_objective(theta, data, prior))
}

pub fn fit<T: Scalar>(data: &LabeledSet<T>, prior: &PriorSpec<T>) -> Result<ModelFit<T>> {
    LogisticRegression::default().fit(data, prior)
}

pub fn predict_proba<T: Scalar>(fit: &ModelFit<T>, x: &[T]) -> Result<T> {
    LogisticRegression::default().predict_proba(fit, x)
}

pub fn log_likelihood<T: Scalar>(theta: &[T], data: &LabeledSet<T>) -> Result<T> {
    LogisticRegression::default().log_likelihood(theta, data)
}

pub fn fisher_information<T: Scalar>(
    theta: &[T],
    data: &LabeledSet<T>,
    prior: &PriorSpec<T>,
) -> Result<SpdMatrix<T>> {
    LogisticRegression::default().fisher_information(theta, data, prior)
}
