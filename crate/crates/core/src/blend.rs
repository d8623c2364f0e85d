//! Blending ensembles.
//!
//! Base models are fit on one stratified part of the training data. Their
//! predictions on the held-out part form the meta-feature matrix, one column
//! per base model, and the meta-model is fit on that matrix alone.
//! Prediction runs the same two steps.

use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::harness::split::stratified_indices;
use crate::learners::{fit, ClassifierSpec, Model, Standardizer};
use crate::seed;
use crate::{Error, Result};

pub const ENSEMBLE_FORMAT_VERSION: u32 = 1;

const ROLE_BASE: u64 = 1;
const ROLE_META: u64 = 2;
const ROLE_SPLIT: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaFeatureMode {
    /// Hard 0/1 predictions.
    #[default]
    Labels,
    /// Real-valued scores from `predict_score`.
    Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlendConfig {
    /// The additional classifiers.
    pub base_specs: Vec<ClassifierSpec>,
    /// The main classifier, trained on base-model outputs.
    pub meta_spec: ClassifierSpec,
    pub val_fraction: f64,
    pub meta_feature_mode: MetaFeatureMode,
    pub seed: u64,
}

impl BlendConfig {
    /// Seeds every member from `seed`: bases by position, the meta-model
    /// by its own role so a kind used twice gets distinct streams.
    pub fn new(base_pool: &[ClassifierSpec], meta: ClassifierSpec, seed: u64) -> Result<Self> {
        Ok(BlendConfig {
            base_specs: get_models(base_pool, seed)?,
            meta_spec: meta.with_seed(meta_seed(seed)),
            val_fraction: 0.3,
            meta_feature_mode: MetaFeatureMode::Labels,
            seed,
        })
    }
}

pub fn meta_seed(master: u64) -> u64 {
    seed::derive_path(master, &[ROLE_META])
}

/// Specs in pool order, each reseeded from `master_seed` by position.
pub fn get_models(pool: &[ClassifierSpec], master_seed: u64) -> Result<Vec<ClassifierSpec>> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    Ok(pool
        .iter()
        .enumerate()
        .map(|(i, spec)| spec.with_seed(seed::derive_path(master_seed, &[ROLE_BASE, i as u64])))
        .collect())
}

/// One column per base model, one row per row of `x`.
pub fn meta_features(
    base_models: &[Model],
    x: ArrayView2<f64>,
    mode: MetaFeatureMode,
) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((x.nrows(), base_models.len()));
    for (mut col, model) in out.axis_iter_mut(Axis(1)).zip(base_models) {
        match mode {
            MetaFeatureMode::Labels => {
                for (o, l) in col.iter_mut().zip(model.predict(x)?) {
                    *o = f64::from(l);
                }
            }
            MetaFeatureMode::Scores => {
                for (o, s) in col.iter_mut().zip(model.predict_score(x)?) {
                    *o = s;
                }
            }
        }
    }
    Ok(out)
}

/// Trained base models plus the meta-model fit on their held-out outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendEnsemble {
    pub base_models: Vec<Model>,
    pub meta_model: Model,
    pub config: BlendConfig,
    /// Applied to input rows before the base models when present.
    pub scaler: Option<Standardizer>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    format_version: u32,
    config: BlendConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scaler: Option<Standardizer>,
    base_models: Vec<Model>,
    meta_model: Model,
}

/// Row indices of the base-training and blend-validation parts.
pub fn blend_split(config: &BlendConfig, y: &[u8]) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(config.val_fraction > 0.0 && config.val_fraction < 1.0) {
        return Err(Error::BadParam("val_fraction must be in (0, 1)".into()));
    }
    let split_seed = seed::derive_path(config.seed, &[ROLE_SPLIT]);
    let (train, val) = stratified_indices(y, config.val_fraction, split_seed)?;
    for (name, part) in [("base-train", &train), ("validation", &val)] {
        let ones = part.iter().filter(|&&i| y[i] == 1).count();
        if ones == 0 || ones == part.len() {
            return Err(Error::DegenerateSplit(format!("{name} part lacks a class")));
        }
    }
    Ok((train, val))
}

pub fn fit_ensemble(config: &BlendConfig, x: ArrayView2<f64>, y: &[u8]) -> Result<BlendEnsemble> {
    if config.base_specs.is_empty() {
        return Err(Error::EmptyPool);
    }
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: y.len(),
        });
    }
    let (train, val) = blend_split(config, y)?;
    let x_train = x.select(Axis(0), &train);
    let y_train: Vec<u8> = train.iter().map(|&i| y[i]).collect();
    let x_val = x.select(Axis(0), &val);
    let y_val: Vec<u8> = val.iter().map(|&i| y[i]).collect();

    let base_models = config
        .base_specs
        .par_iter()
        .map(|spec| fit(spec, x_train.view(), &y_train))
        .collect::<Result<Vec<_>>>()?;
    let meta_x = meta_features(&base_models, x_val.view(), config.meta_feature_mode)?;
    let meta_model = fit(&config.meta_spec, meta_x.view(), &y_val)?;

    Ok(BlendEnsemble {
        base_models,
        meta_model,
        config: config.clone(),
        scaler: None,
    })
}

/// Fits a standardizer on `x`, then the ensemble on the standardized rows.
/// Prediction applies the same scaling.
pub fn fit_ensemble_scaled(
    config: &BlendConfig,
    x: ArrayView2<f64>,
    y: &[u8],
) -> Result<BlendEnsemble> {
    let scaler = Standardizer::fit(x);
    let mut e = fit_ensemble(config, scaler.apply(x).view(), y)?;
    e.scaler = Some(scaler);
    Ok(e)
}

pub fn predict_ensemble(e: &BlendEnsemble, x: ArrayView2<f64>) -> Result<Vec<u8>> {
    e.predict(x)
}

impl BlendEnsemble {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<u8>> {
        let scaled;
        let x = match &self.scaler {
            Some(s) => {
                if s.mean.len() != x.ncols() {
                    return Err(Error::ShapeMismatch {
                        expected: s.mean.len(),
                        got: x.ncols(),
                    });
                }
                scaled = s.apply(x);
                scaled.view()
            }
            None => x,
        };
        let meta_x = meta_features(&self.base_models, x, self.config.meta_feature_mode)?;
        self.meta_model.predict(meta_x.view())
    }

    pub fn n_features(&self) -> usize {
        self.base_models[0].n_features()
    }

    pub fn to_json(&self) -> Result<String> {
        crate::to_json_string(&EnsembleFile {
            format_version: ENSEMBLE_FORMAT_VERSION,
            config: self.config.clone(),
            scaler: self.scaler.clone(),
            base_models: self.base_models.clone(),
            meta_model: self.meta_model.clone(),
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: EnsembleFile = crate::from_json_str(s)?;
        if file.format_version != ENSEMBLE_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "ensemble format_version {} (expected {ENSEMBLE_FORMAT_VERSION})",
                file.format_version
            )));
        }
        if file.base_models.is_empty() {
            return Err(Error::EmptyPool);
        }
        if file.meta_model.n_features() != file.base_models.len() {
            return Err(Error::ShapeMismatch {
                expected: file.base_models.len(),
                got: file.meta_model.n_features(),
            });
        }
        Ok(BlendEnsemble {
            base_models: file.base_models,
            meta_model: file.meta_model,
            config: file.config,
            scaler: file.scaler,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        BlendEnsemble::from_json(&text)
    }
}
