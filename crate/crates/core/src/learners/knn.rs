use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// The stored training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnState {
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

pub(super) fn fit(p: &KnnParams, x: ArrayView2<f64>, y: &[u8]) -> KnnState {
    KnnState {
        k: p.k.min(y.len()),
        rows: x.rows().into_iter().map(|r| r.to_vec()).collect(),
        labels: y.to_vec(),
    }
}

impl KnnState {
    /// Fraction of the `k` nearest training rows labelled 1. Equal distances
    /// go to the lower training index.
    pub fn score(&self, query: &[f64]) -> f64 {
        let mut dists: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let d2: f64 = r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dists.len() {
            dists.select_nth_unstable_by(self.k - 1, by_dist);
        }
        let ones = dists[..self.k]
            .iter()
            .filter(|&&(_, i)| self.labels[i] == 1)
            .count();
        ones as f64 / self.k as f64
    }
}
