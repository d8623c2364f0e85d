//! Logistic regression and a Pegasos-trained linear SVM, both on
//! standardized inputs.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            learning_rate: 0.1,
            epochs: 1000,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            lambda: 1e-3,
            epochs: 1000,
        }
    }
}

/// Per-column `(x - mean) / scale`, with `scale = 1` for constant columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<f64>) -> Self {
        let n = x.nrows() as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.columns() {
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            let sd = var.sqrt();
            mean.push(m);
            scale.push(if sd > 0.0 && sd.is_finite() { sd } else { 1.0 });
        }
        Standardizer { mean, scale }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Vec<Vec<f64>> {
        x.rows()
            .into_iter()
            .map(|r| self.transform_row(&r.to_vec()))
            .collect()
    }

    /// Standardized copy of `x` as a matrix.
    pub fn apply(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for (v, (m, s)) in row.iter_mut().zip(self.mean.iter().zip(&self.scale)) {
                *v = (*v - m) / s;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearState {
    pub scaler: Standardizer,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearState {
    /// `w . z + b` on the standardized row.
    pub fn margin(&self, row: &[f64]) -> f64 {
        let z = self.scaler.transform_row(row);
        dot(&self.weights, &z) + self.bias
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Full-batch gradient descent on L2-regularized mean log-loss. The bias is
/// not regularized.
pub(super) fn fit_logistic(p: &LogisticParams, x: ArrayView2<f64>, y: &[u8]) -> LinearState {
    let scaler = Standardizer::fit(x);
    let z = scaler.transform(x);
    let (n, d) = (z.len() as f64, x.ncols());
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut grad = vec![0.0; d];
    for _ in 0..p.epochs {
        grad.fill(0.0);
        let mut grad_b = 0.0;
        for (row, &label) in z.iter().zip(y) {
            let err = sigmoid(dot(&w, row) + b) - f64::from(label);
            for (g, v) in grad.iter_mut().zip(row) {
                *g += err * v;
            }
            grad_b += err;
        }
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi -= p.learning_rate * (g / n + p.l2 * *wi);
        }
        b -= p.learning_rate * grad_b / n;
    }
    LinearState {
        scaler,
        weights: w,
        bias: b,
    }
}

/// Pegasos: stochastic subgradient descent on the hinge loss with step
/// `1 / (lambda * t)` and projection onto the ball of radius
/// `1 / sqrt(lambda)`. The bias is an extra weight on a constant 1 input.
pub(super) fn fit_svm(p: &SvmParams, seed: u64, x: ArrayView2<f64>, y: &[u8]) -> LinearState {
    let scaler = Standardizer::fit(x);
    let z: Vec<Vec<f64>> = scaler
        .transform(x)
        .into_iter()
        .map(|mut r| {
            r.push(1.0);
            r
        })
        .collect();
    let signs: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let sq_norms: Vec<f64> = z.iter().map(|r| dot(r, r)).collect();
    let radius = 1.0 / p.lambda.sqrt();
    // w = scale * v, so the per-step decay and projection touch one scalar.
    let mut v = vec![0.0; x.ncols() + 1];
    let mut scale = 1.0;
    let mut v_sq = 0.0;
    let mut order: Vec<usize> = (0..z.len()).collect();
    let mut rng = seed::rng(seed);
    let mut t = 0u64;
    for _ in 0..p.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (p.lambda * t as f64);
            let vx = dot(&v, &z[i]);
            let violated = signs[i] * scale * vx < 1.0;
            scale *= 1.0 - eta * p.lambda;
            if scale == 0.0 {
                v.fill(0.0);
                scale = 1.0;
                v_sq = 0.0;
            }
            if violated {
                let c = eta * signs[i] / scale;
                let vx = if v_sq == 0.0 { 0.0 } else { vx };
                for (vj, xj) in v.iter_mut().zip(&z[i]) {
                    *vj += c * xj;
                }
                v_sq += 2.0 * c * vx + c * c * sq_norms[i];
            }
            let norm = scale * v_sq.max(0.0).sqrt();
            if norm > radius {
                scale *= radius / norm;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|vj| *vj *= scale);
                v_sq = dot(&v, &v);
                scale = 1.0;
            }
        }
    }
    let mut w: Vec<f64> = v.iter().map(|vj| vj * scale).collect();
    let bias = w.pop().unwrap_or(0.0);
    LinearState {
        scaler,
        weights: w,
        bias,
    }
}
