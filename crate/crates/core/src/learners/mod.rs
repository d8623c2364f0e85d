//! Binary classifiers behind a single fit / predict contract.
//!
//! Labels are `0` or `1`. Every kind also exposes a real-valued score;
//! `predict` is exactly that score thresholded at the kind's threshold
//! (strictly above 0.5 for probabilistic kinds, strictly above 0 for the
//! SVM margin), so ties resolve to class 0.

mod forest;
mod knn;
mod linear;
mod naive_bayes;
mod tree;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub use forest::ForestParams;
pub use knn::KnnParams;
pub use linear::{LogisticParams, Standardizer, SvmParams};
pub use naive_bayes::NaiveBayesParams;
pub use tree::{Node, Tree, TreeParams};

use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn,
    DecisionTree,
    RandomForest,
    LogisticRegression,
    Svm,
    NaiveBayes,
    /// Always predicts one fixed label. Not part of any sweep pool.
    Constant,
}

impl ClassifierKind {
    /// The five classifiers compared in the sweep by default.
    pub const DEFAULT_POOL: [ClassifierKind; 5] = [
        ClassifierKind::Knn,
        ClassifierKind::RandomForest,
        ClassifierKind::Svm,
        ClassifierKind::LogisticRegression,
        ClassifierKind::DecisionTree,
    ];

    pub const LEARNED: [ClassifierKind; 6] = [
        ClassifierKind::Knn,
        ClassifierKind::DecisionTree,
        ClassifierKind::RandomForest,
        ClassifierKind::LogisticRegression,
        ClassifierKind::Svm,
        ClassifierKind::NaiveBayes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::DecisionTree => "decision_tree",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::LogisticRegression => "logistic_regression",
            ClassifierKind::Svm => "svm",
            ClassifierKind::NaiveBayes => "naive_bayes",
            ClassifierKind::Constant => "constant",
        }
    }

    /// Decision threshold on [`Model::predict_score`].
    pub fn threshold(self) -> f64 {
        match self {
            ClassifierKind::Svm => 0.0,
            _ => 0.5,
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let kind = match s.as_str() {
            "knn" => ClassifierKind::Knn,
            "decision_tree" | "dt" => ClassifierKind::DecisionTree,
            "random_forest" | "rf" => ClassifierKind::RandomForest,
            "logistic_regression" | "lr" => ClassifierKind::LogisticRegression,
            "svm" | "svc" => ClassifierKind::Svm,
            "naive_bayes" | "nb" => ClassifierKind::NaiveBayes,
            "constant" => ClassifierKind::Constant,
            _ => return Err(Error::BadParam(format!("unknown classifier kind {s:?}"))),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "hyperparameters", rename_all = "snake_case")]
pub enum Hyperparams {
    Knn(KnnParams),
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    LogisticRegression(LogisticParams),
    Svm(SvmParams),
    NaiveBayes(NaiveBayesParams),
    Constant { label: u8 },
}

/// Finite and strictly positive.
fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl Hyperparams {
    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Knn => Hyperparams::Knn(KnnParams::default()),
            ClassifierKind::DecisionTree => Hyperparams::DecisionTree(TreeParams::default()),
            ClassifierKind::RandomForest => Hyperparams::RandomForest(ForestParams::default()),
            ClassifierKind::LogisticRegression => {
                Hyperparams::LogisticRegression(LogisticParams::default())
            }
            ClassifierKind::Svm => Hyperparams::Svm(SvmParams::default()),
            ClassifierKind::NaiveBayes => Hyperparams::NaiveBayes(NaiveBayesParams::default()),
            ClassifierKind::Constant => Hyperparams::Constant { label: 0 },
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Hyperparams::Knn(_) => ClassifierKind::Knn,
            Hyperparams::DecisionTree(_) => ClassifierKind::DecisionTree,
            Hyperparams::RandomForest(_) => ClassifierKind::RandomForest,
            Hyperparams::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            Hyperparams::Svm(_) => ClassifierKind::Svm,
            Hyperparams::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            Hyperparams::Constant { .. } => ClassifierKind::Constant,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::BadParam(msg.into()));
        match self {
            Hyperparams::Knn(p) if p.k == 0 => bad("knn k must be >= 1"),
            Hyperparams::DecisionTree(p) if p.min_samples_split < 2 => {
                bad("min_samples_split must be >= 2")
            }
            Hyperparams::RandomForest(p) if p.n_trees == 0 || p.tree.min_samples_split < 2 => {
                bad("random forest needs n_trees >= 1 and min_samples_split >= 2")
            }
            Hyperparams::RandomForest(p) if p.max_features == Some(0) => {
                bad("max_features must be >= 1")
            }
            Hyperparams::LogisticRegression(p)
                if !positive(p.learning_rate) || p.l2.is_nan() || p.l2 < 0.0 =>
            {
                bad("logistic regression needs learning_rate > 0 and l2 >= 0")
            }
            Hyperparams::Svm(p) if !positive(p.lambda) => bad("svm lambda must be > 0"),
            Hyperparams::NaiveBayes(p) if !positive(p.var_smoothing) => {
                bad("var_smoothing must be > 0")
            }
            Hyperparams::Constant { label } if *label > 1 => bad("constant label must be 0 or 1"),
            _ => Ok(()),
        }
    }
}

/// A classifier kind with hyperparameters and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    #[serde(flatten)]
    pub hyperparameters: Hyperparams,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind, seed: u64) -> Self {
        ClassifierSpec {
            hyperparameters: Hyperparams::default_for(kind),
            seed,
        }
    }

    pub fn constant(label: u8) -> Self {
        ClassifierSpec {
            hyperparameters: Hyperparams::Constant { label },
            seed: 0,
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        self.hyperparameters.kind()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

impl From<ClassifierKind> for ClassifierSpec {
    fn from(kind: ClassifierKind) -> Self {
        ClassifierSpec::new(kind, 0)
    }
}

/// Kind-specific trained state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum TrainedState {
    /// Used for every kind when the training labels hold a single class.
    Constant {
        label: u8,
    },
    Knn(knn::KnnState),
    Tree(Tree),
    Forest {
        trees: Vec<Tree>,
    },
    Linear(linear::LinearState),
    NaiveBayes(naive_bayes::NaiveBayesState),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub n_features: usize,
    #[serde(flatten)]
    pub state: TrainedState,
}

/// A trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub spec: ClassifierSpec,
    pub parameters: Parameters,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    spec: ClassifierSpec,
    parameters: Parameters,
}

pub(crate) fn check_labels(y: &[u8]) -> Result<()> {
    match y.iter().position(|&l| l > 1) {
        Some(i) => Err(Error::Label {
            line: i + 1,
            value: y[i].to_string(),
        }),
        None => Ok(()),
    }
}

/// Trains a model. Deterministic in `(spec, x, y)`.
pub fn fit(spec: &ClassifierSpec, x: ArrayView2<f64>, y: &[u8]) -> Result<Model> {
    spec.hyperparameters.validate()?;
    if x.nrows() == 0 {
        return Err(Error::EmptyInput);
    }
    if y.len() != x.nrows() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: y.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteFeature);
    }
    check_labels(y)?;

    let ones = y.iter().filter(|&&l| l == 1).count();
    let state = if let Hyperparams::Constant { label } = spec.hyperparameters {
        TrainedState::Constant { label }
    } else if ones == 0 || ones == y.len() {
        TrainedState::Constant {
            label: u8::from(ones > 0),
        }
    } else {
        match &spec.hyperparameters {
            Hyperparams::Knn(p) => TrainedState::Knn(knn::fit(p, x, y)),
            Hyperparams::DecisionTree(p) => TrainedState::Tree(tree::fit(p, x, y)),
            Hyperparams::RandomForest(p) => TrainedState::Forest {
                trees: forest::fit(p, spec.seed, x, y),
            },
            Hyperparams::LogisticRegression(p) => {
                TrainedState::Linear(linear::fit_logistic(p, x, y))
            }
            Hyperparams::Svm(p) => TrainedState::Linear(linear::fit_svm(p, spec.seed, x, y)),
            Hyperparams::NaiveBayes(p) => TrainedState::NaiveBayes(naive_bayes::fit(p, x, y)),
            Hyperparams::Constant { .. } => unreachable!(),
        }
    };
    Ok(Model {
        spec: *spec,
        parameters: Parameters {
            n_features: x.ncols(),
            state,
        },
    })
}

pub fn predict(m: &Model, x: ArrayView2<f64>) -> Result<Vec<u8>> {
    m.predict(x)
}

pub fn predict_score(m: &Model, x: ArrayView2<f64>) -> Result<Vec<f64>> {
    m.predict_score(x)
}

impl Model {
    pub fn kind(&self) -> ClassifierKind {
        self.spec.kind()
    }

    pub fn n_features(&self) -> usize {
        self.parameters.n_features
    }

    fn check_shape(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.parameters.n_features {
            return Err(Error::ShapeMismatch {
                expected: self.parameters.n_features,
                got: x.ncols(),
            });
        }
        Ok(())
    }

    /// Class-1 posterior, vote fraction, or SVM margin, one per row.
    pub fn predict_score(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        self.check_shape(x)?;
        let scores = x
            .rows()
            .into_iter()
            .map(|row| match row.as_slice() {
                Some(r) => self.score_row(r),
                None => self.score_row(&row.to_vec()),
            })
            .collect();
        Ok(scores)
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<u8>> {
        let threshold = self.kind().threshold();
        Ok(self
            .predict_score(x)?
            .into_iter()
            .map(|s| u8::from(s > threshold))
            .collect())
    }

    fn score_row(&self, row: &[f64]) -> f64 {
        match &self.parameters.state {
            TrainedState::Constant { label } => f64::from(*label),
            TrainedState::Knn(s) => s.score(row),
            TrainedState::Tree(t) => t.score(row),
            TrainedState::Forest { trees } => forest::score(trees, row),
            TrainedState::Linear(s) => match self.kind() {
                ClassifierKind::Svm => s.margin(row),
                _ => linear::sigmoid(s.margin(row)),
            },
            TrainedState::NaiveBayes(s) => s.score(row),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        crate::to_json_string(&ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            spec: self.spec,
            parameters: self.parameters.clone(),
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ModelFile = crate::from_json_str(s)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "model format_version {} (expected {MODEL_FORMAT_VERSION})",
                file.format_version
            )));
        }
        Ok(Model {
            spec: file.spec,
            parameters: file.parameters,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::from_json(&text)
    }
}
