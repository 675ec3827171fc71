//! Experiment configuration, read from a single TOML file.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use pls_core::datagen::{self, Dataset, SplitSpec, SyntheticSpec};
use pls_core::{Aggregation, CriterionSpec, ObjectiveSpec, PriorSpec, StoppingRule, SupersetMode};
use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub data: DataConfig,
    pub split: SplitConfig,
    pub prior: PriorConfig,
    #[serde(default)]
    pub stopping: StoppingConfig,
    pub criteria: Vec<NamedCriterion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataConfig {
    /// Logistic data drawn fresh for every seed.
    Synthetic {
        /// Rows to generate; defaults to the split total.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        d_features: usize,
        theta_star: Vec<f64>,
        #[serde(default = "unit_scale")]
        feature_scale: f64,
    },
    /// A fixed table; only the split changes between seeds.
    Csv {
        path: PathBuf,
        label_column: String,
        positive_label: String,
    },
}

fn unit_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub n_labeled: usize,
    pub n_unlabeled: usize,
    pub n_test: usize,
    #[serde(default)]
    pub stratified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub precision: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StoppingConfig {
    #[default]
    ExhaustPool,
    MaxIterations { k: usize },
    ScoreThreshold { threshold: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCriterion {
    pub name: String,
    #[serde(flatten)]
    pub criterion: CriterionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CriterionConfig {
    PseudoPosteriorPredictive,
    Confidence,
    AugmentedLikelihood,
    PredictiveVariance,
    MultiObjective {
        objectives: Vec<ObjectiveConfig>,
        aggregation: AggregationConfig,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        weights: Vec<f64>,
    },
    Superset {
        mode: ModeConfig,
        inner: Box<CriterionConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveConfig {
    ModelSpec { features: Vec<usize> },
    LabeledOnlyLikelihood,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationConfig {
    Min,
    WeightedSum,
    RankSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    Optimistic,
    Pessimistic,
}

/// Split seeds are derived from the run seed so the generator and the
/// permutation never share a stream.
pub fn split_seed(seed: u64) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15)
}

fn invalid(message: impl Into<String>) -> BenchError {
    BenchError::Config(message.into())
}

impl CriterionConfig {
    pub fn build(&self, prior: PriorSpec<f64>) -> CriterionSpec<f64> {
        match self {
            Self::PseudoPosteriorPredictive => CriterionSpec::pseudo_posterior_predictive(prior),
            Self::Confidence => CriterionSpec::confidence(prior),
            Self::AugmentedLikelihood => CriterionSpec::augmented_likelihood(prior),
            Self::PredictiveVariance => CriterionSpec::predictive_variance(prior),
            Self::MultiObjective {
                objectives,
                aggregation,
                weights,
            } => {
                let objectives = objectives
                    .iter()
                    .map(|o| match o {
                        ObjectiveConfig::ModelSpec { features } => ObjectiveSpec::ModelSpec {
                            features: features.clone(),
                        },
                        ObjectiveConfig::LabeledOnlyLikelihood => ObjectiveSpec::LabeledOnlyLikelihood,
                    })
                    .collect();
                let aggregation = match aggregation {
                    AggregationConfig::Min => Aggregation::Min,
                    AggregationConfig::WeightedSum => Aggregation::WeightedSum(weights.clone()),
                    AggregationConfig::RankSum => Aggregation::RankSum,
                };
                CriterionSpec::multi_objective(objectives, aggregation, prior)
            }
            Self::Superset { mode, inner } => {
                let mode = match mode {
                    ModeConfig::Optimistic => SupersetMode::Optimistic,
                    ModeConfig::Pessimistic => SupersetMode::Pessimistic,
                };
                CriterionSpec::superset(inner.build(prior), mode)
            }
        }
    }

    pub fn is_confidence(&self) -> bool {
        matches!(self, Self::Confidence)
    }
}

impl StoppingConfig {
    pub fn build(self) -> StoppingRule<f64> {
        match self {
            Self::ExhaustPool => StoppingRule::ExhaustPool,
            Self::MaxIterations { k } => StoppingRule::MaxIterations(k),
            Self::ScoreThreshold { threshold } => StoppingRule::ScoreThreshold(threshold),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let config: Self = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        // Relative CSV paths are resolved against the config file.
        if let DataConfig::Csv { path: csv, .. } = &mut config.data {
            if csv.is_relative() {
                if let Some(dir) = path.parent() {
                    *csv = dir.join(&*csv);
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn prior_spec(&self) -> Result<PriorSpec<f64>, BenchError> {
        PriorSpec::new(self.prior.precision).map_err(|e| invalid(e.to_string()))
    }

    pub fn split_spec(&self, seed: u64) -> SplitSpec {
        SplitSpec {
            n_labeled: self.split.n_labeled,
            n_unlabeled: self.split.n_unlabeled,
            n_test: self.split.n_test,
            seed: split_seed(seed),
            stratified: self.split.stratified,
        }
    }

    pub fn synthetic_spec(&self, seed: u64) -> Option<SyntheticSpec> {
        match &self.data {
            DataConfig::Synthetic {
                n,
                d_features,
                theta_star,
                feature_scale,
            } => Some(SyntheticSpec {
                seed,
                n: n.unwrap_or_else(|| self.split_spec(seed).total()),
                d_features: *d_features,
                theta_star: theta_star.clone(),
                feature_scale: *feature_scale,
            }),
            DataConfig::Csv { .. } => None,
        }
    }

    /// Loads the CSV source, if any. Synthetic data is generated per seed.
    pub fn load_table(&self) -> Result<Option<Dataset<f64>>, BenchError> {
        match &self.data {
            DataConfig::Csv {
                path,
                label_column,
                positive_label,
            } => datagen::load_csv(path, label_column, positive_label)
                .map(Some)
                .map_err(|e| invalid(format!("{}: {e}", path.display()))),
            DataConfig::Synthetic { .. } => Ok(None),
        }
    }

    /// Model dimension including the intercept, when known without reading data.
    fn synthetic_dim(&self) -> Option<usize> {
        match &self.data {
            DataConfig::Synthetic { d_features, .. } => Some(d_features + 1),
            DataConfig::Csv { .. } => None,
        }
    }

    /// Checks everything that can be checked before any run starts.
    /// `dim` is the model dimension of a loaded CSV table.
    pub fn validate(&self, dim: Option<usize>) -> Result<(), BenchError> {
        if self.seeds.is_empty() {
            return Err(invalid("at least one seed is required"));
        }
        let mut seeds = HashSet::new();
        if let Some(s) = self.seeds.iter().find(|s| !seeds.insert(**s)) {
            return Err(invalid(format!("duplicate seed {s}")));
        }
        if self.criteria.is_empty() {
            return Err(invalid("at least one criterion is required"));
        }
        let mut names = HashSet::new();
        for c in &self.criteria {
            if c.name.is_empty() || !c.name.chars().all(|ch| ch.is_ascii_alphanumeric() || "-_.".contains(ch)) {
                return Err(invalid(format!(
                    "criterion name {:?} must be non-empty and use only [A-Za-z0-9._-]",
                    c.name
                )));
            }
            if !names.insert(c.name.as_str()) {
                return Err(invalid(format!("duplicate criterion name {:?}", c.name)));
            }
        }
        let prior = self.prior_spec()?;
        self.stopping.build().validate().map_err(|e| invalid(e.to_string()))?;
        if self.split.n_labeled == 0 || self.split.n_test == 0 {
            return Err(invalid("n_labeled and n_test must be positive"));
        }
        if let Some(spec) = self.synthetic_spec(self.seeds[0]) {
            spec.validate().map_err(|e| invalid(e.to_string()))?;
            if spec.n < self.split_spec(0).total() {
                return Err(invalid(format!(
                    "split needs {} rows but data.n is {}",
                    self.split_spec(0).total(),
                    spec.n
                )));
            }
        }
        if let Some(d) = dim.or(self.synthetic_dim()) {
            for c in &self.criteria {
                c.criterion
                    .build(prior)
                    .validate(d)
                    .map_err(|e| invalid(format!("criterion {:?}: {e}", c.name)))?;
            }
        }
        Ok(())
    }

    /// Small-labeled-set regime in which self-training is prone to
    /// confirmation bias.
    pub fn overfit_prone() -> Self {
        Self {
            seeds: (1..=50).collect(),
            output_dir: Some(PathBuf::from("results/overfit-prone")),
            data: DataConfig::Synthetic {
                n: None,
                d_features: 10,
                theta_star: vec![0.0, 1.5, -1.5, 1.0, -1.0, 0.5, -0.5, 0.0, 0.0, 0.0, 0.0],
                feature_scale: 1.0,
            },
            split: SplitConfig {
                n_labeled: 20,
                n_unlabeled: 200,
                n_test: 500,
                stratified: true,
            },
            prior: PriorConfig { precision: 1.0 },
            stopping: StoppingConfig::ExhaustPool,
            criteria: vec![
                NamedCriterion {
                    name: "confidence".into(),
                    criterion: CriterionConfig::Confidence,
                },
                NamedCriterion {
                    name: "pseudo_posterior_predictive".into(),
                    criterion: CriterionConfig::PseudoPosteriorPredictive,
                },
            ],
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "overfit-prone" => Some(Self::overfit_prone()),
            _ => None,
        }
    }
}
