use ndarray::ArrayView2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Builder, FeatureSampler, Tree, TreeParams};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate features per split; `None` means `floor(sqrt(n_features))`.
    pub max_features: Option<usize>,
    #[serde(flatten)]
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: None,
            tree: TreeParams::default(),
        }
    }
}

/// Bootstrap-aggregated CART trees. Tree `t` draws its bootstrap sample and
/// per-node feature subsets from its own stream seeded by
/// `derive_seed(seed, t)`, so the result does not depend on scheduling.
pub(super) fn fit(p: &ForestParams, seed: u64, x: ArrayView2<f64>, y: &[u8]) -> Vec<Tree> {
    let n = y.len();
    let max_features = p
        .max_features
        .unwrap_or_else(|| (x.ncols() as f64).sqrt().floor() as usize)
        .clamp(1, x.ncols());
    (0..p.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed::derive_seed(seed, t as u64));
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let sampler = FeatureSampler {
                rng: &mut rng,
                max_features,
            };
            Builder::new(x, y, p.tree, Some(sampler)).build(&rows)
        })
        .collect()
}

/// Fraction of trees voting class 1.
pub(super) fn score(trees: &[Tree], row: &[f64]) -> f64 {
    let votes = trees.iter().filter(|t| t.predict(row) == 1).count();
    votes as f64 / trees.len() as f64
}
