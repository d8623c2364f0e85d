use std::f64::consts::PI;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NaiveBayesParams {
    /// Added to every variance, relative to the largest feature variance.
    pub var_smoothing: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        NaiveBayesParams {
            var_smoothing: 1e-9,
        }
    }
}

/// Per-class Gaussian feature model; index 0 is class 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesState {
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub log_priors: [f64; 2],
}

fn column_var(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

pub(super) fn fit(p: &NaiveBayesParams, x: ArrayView2<f64>, y: &[u8]) -> NaiveBayesState {
    let max_var = x
        .columns()
        .into_iter()
        .map(|c| column_var(c.iter().copied()).1)
        .fold(0.0, f64::max);
    // An all-constant matrix still needs a positive variance.
    let eps = if max_var > 0.0 {
        p.var_smoothing * max_var
    } else {
        p.var_smoothing
    };

    let n = y.len() as f64;
    let stats = |class: u8| {
        let mut means = Vec::with_capacity(x.ncols());
        let mut vars = Vec::with_capacity(x.ncols());
        for col in x.columns() {
            let vals = col
                .iter()
                .zip(y)
                .filter(|(_, &l)| l == class)
                .map(|(&v, _)| v);
            let (m, v) = column_var(vals);
            means.push(m);
            vars.push(v + eps);
        }
        let count = y.iter().filter(|&&l| l == class).count() as f64;
        (means, vars, (count / n).ln())
    };
    let (m0, v0, p0) = stats(0);
    let (m1, v1, p1) = stats(1);
    NaiveBayesState {
        means: [m0, m1],
        variances: [v0, v1],
        log_priors: [p0, p1],
    }
}

impl NaiveBayesState {
    fn joint_log_likelihood(&self, class: usize, row: &[f64]) -> f64 {
        let ll: f64 = row
            .iter()
            .zip(self.means[class].iter().zip(&self.variances[class]))
            .map(|(x, (m, v))| -0.5 * (2.0 * PI * v).ln() - (x - m) * (x - m) / (2.0 * v))
            .sum();
        self.log_priors[class] + ll
    }

    /// Posterior probability of class 1.
    pub fn score(&self, row: &[f64]) -> f64 {
        let l0 = self.joint_log_likelihood(0, row);
        let l1 = self.joint_log_likelihood(1, row);
        super::linear::sigmoid(l1 - l0)
    }
}
