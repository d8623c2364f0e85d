use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;

use crate::seed;
use crate::{Error, Result};

const MAX_ITER: usize = 100;
const SHIFT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Array2<f64>,
    /// Within-cluster sum of squares after each Lloyd update.
    pub cost_history: Vec<f64>,
}

impl KMeansResult {
    pub fn cost(&self) -> f64 {
        self.cost_history.last().copied().unwrap_or(0.0)
    }
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: ArrayView1<f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init<R: Rng>(points: ArrayView2<f64>, k: usize, rng: &mut R) -> Array2<f64> {
    let n = points.nrows();
    let mut centroids = Array2::zeros((k, points.ncols()));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&points.row(first));
    let mut d2: Vec<f64> = points
        .rows()
        .into_iter()
        .map(|p| sq_dist(p, centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).assign(&points.row(pick));
        for (i, p) in points.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, centroids.row(c)));
        }
    }
    centroids
}

fn update_centroids(points: ArrayView2<f64>, assignments: &[usize], k: usize) -> Array2<f64> {
    let mut sums = Array2::zeros((k, points.ncols()));
    let mut counts = vec![0usize; k];
    for (p, &c) in points.rows().into_iter().zip(assignments) {
        let mut row = sums.row_mut(c);
        row += &p;
        counts[c] += 1;
    }
    for (mut row, &count) in sums.rows_mut().into_iter().zip(&counts) {
        if count > 0 {
            row /= count as f64;
        }
    }
    sums
}

/// Lloyd's algorithm with k-means++ seeding.
///
/// Stops once no centroid moves by `1e-4` or more, or after 100 iterations.
/// A cluster left empty by the assignment step takes the point farthest from
/// its current centroid.
pub fn kmeans(points: ArrayView2<f64>, k: usize, seed: u64) -> Result<KMeansResult> {
    let n = points.nrows();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if k == 0 || k > n {
        return Err(Error::BadParam(format!("k = {k} must be in 1..={n}")));
    }
    let mut rng = seed::rng(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let mut assignments = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut cost_history = Vec::new();

    for _ in 0..MAX_ITER {
        let mut counts = vec![0usize; k];
        for (i, p) in points.rows().into_iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            assignments[i] = c;
            dists[i] = d;
            counts[c] += 1;
        }
        for empty in 0..k {
            if counts[empty] > 0 {
                continue;
            }
            let donor = (0..n)
                .filter(|&i| counts[assignments[i]] > 1)
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
            if let Some(i) = donor {
                counts[assignments[i]] -= 1;
                assignments[i] = empty;
                counts[empty] = 1;
                dists[i] = 0.0;
            }
        }

        let updated = update_centroids(points, &assignments, k);
        let shift = centroids
            .rows()
            .into_iter()
            .zip(updated.rows())
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        let cost = points
            .rows()
            .into_iter()
            .zip(&assignments)
            .map(|(p, &c)| sq_dist(p, centroids.row(c)))
            .sum();
        cost_history.push(cost);
        if shift < SHIFT_TOL {
            break;
        }
    }

    Ok(KMeansResult {
        assignments,
        centroids,
        cost_history,
    })
}
