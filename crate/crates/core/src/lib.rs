//! Decision-theoretic pseudo-label selection for semi-supervised binary
//! classification.
//!
//! The crate provides a Newton/IRLS logistic-regression learner, a family of
//! selection criteria (most importantly the Laplace-approximated pseudo
//! posterior predictive `ℓ(θ̂) − ½ log|I(θ̂)|`), the self-training loop that
//! uses them, and seeded data generation for benchmarks.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod criteria;
pub mod datagen;
pub mod engine;
pub mod error;
pub mod glm;
pub mod numerics;
pub mod scalar;

pub use criteria::{
    Aggregation, CandidateScore, CriterionKind, CriterionSpec, ObjectiveSpec, ScoringContext, SupersetMode,
};
pub use datagen::{Dataset, SeededRng, Split, SplitSpec, SyntheticSpec};
pub use engine::{
    EngineFailure, EngineOptions, Parallelism, RunOutcome, SelectionTrace, StoppingRule, TraceStep,
};
pub use error::{Error, Result};
pub use glm::{Label, LabeledSet, Learner, LogisticRegression, ModelFit, PriorSpec, UnlabeledPool};
pub use numerics::{CholeskyFactor, SpdMatrix};
pub use scalar::Scalar;

pub type SpdMatrix64 = SpdMatrix<f64>;
pub type LabeledSet64 = LabeledSet<f64>;
pub type UnlabeledPool64 = UnlabeledPool<f64>;
pub type PriorSpec64 = PriorSpec<f64>;
pub type ModelFit64 = ModelFit<f64>;
pub type CriterionSpec64 = CriterionSpec<f64>;
pub type CandidateScore64 = CandidateScore<f64>;
pub type SelectionTrace64 = SelectionTrace<f64>;
pub type StoppingRule64 = StoppingRule<f64>;
pub type Dataset64 = Dataset<f64>;
pub type LogisticRegression64 = LogisticRegression<f64>;

pub type LabeledSet32 = LabeledSet<f32>;
pub type UnlabeledPool32 = UnlabeledPool<f32>;
pub type ModelFit32 = ModelFit<f32>;
pub type LogisticRegression32 = LogisticRegression<f32>;
