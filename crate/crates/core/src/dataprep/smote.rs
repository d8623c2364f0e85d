use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kmeans::kmeans;
use super::Dataset;
use crate::metrics::FeatureRow;
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteParams {
    pub n_clusters: usize,
    /// Minimum minority fraction for a cluster to receive synthetic rows.
    pub cluster_balance_threshold: f64,
    pub k_neighbors: usize,
    /// Exponent applied to the mean intra-cluster minority distance.
    pub density_exponent: f64,
    pub seed: u64,
}

impl Default for SmoteParams {
    fn default() -> Self {
        SmoteParams {
            n_clusters: 8,
            cluster_balance_threshold: 0.5,
            k_neighbors: 5,
            density_exponent: FeatureRow::N_FEATURES as f64,
            seed: 0,
        }
    }
}

impl SmoteParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 || self.k_neighbors == 0 {
            return Err(Error::BadParam(
                "n_clusters and k_neighbors must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.cluster_balance_threshold) {
            return Err(Error::BadParam(
                "cluster_balance_threshold must be in [0, 1]".into(),
            ));
        }
        if !self.density_exponent.is_finite() {
            return Err(Error::BadParam("density_exponent must be finite".into()));
        }
        Ok(())
    }
}

fn dist(a: &[f64; 7], b: &[f64; 7]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Integer shares of `total` proportional to `weights` (which sum to 1),
/// with leftovers going to the largest fractional parts, lowest index first
/// on ties.
fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut shares: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = shares.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned)) {
        shares[i] += 1;
    }
    shares
}

/// One group of minority points eligible for interpolation.
struct Group {
    members: Vec<[f64; 7]>,
    /// For each member, indices of its nearest other members.
    neighbors: Vec<Vec<usize>>,
}

impl Group {
    fn new(members: Vec<[f64; 7]>, k: usize) -> Self {
        let k = k.min(members.len().saturating_sub(1));
        let neighbors = members
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let mut others: Vec<(f64, usize)> = members
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(j, y)| (dist(x, y), j))
                    .collect();
                others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                others.into_iter().take(k).map(|(_, j)| j).collect()
            })
            .collect();
        Group { members, neighbors }
    }

    /// `(mean pairwise distance)^exponent / count`; zero for a single member.
    fn sparsity(&self, exponent: f64) -> f64 {
        let m = self.members.len();
        if m < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                total += dist(&self.members[i], &self.members[j]);
            }
        }
        let mean = total / (m * (m - 1) / 2) as f64;
        mean.powf(exponent) / m as f64
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> [f64; 7] {
        let i = rng.random_range(0..self.members.len());
        let x = self.members[i];
        let nbrs = &self.neighbors[i];
        if nbrs.is_empty() {
            return x;
        }
        let x2 = self.members[nbrs[rng.random_range(0..nbrs.len())]];
        let u: f64 = rng.random();
        std::array::from_fn(|f| x[f] + u * (x2[f] - x[f]))
    }
}

/// Oversamples the minority class to exact balance.
///
/// Rows are clustered with k-means; clusters whose minority fraction reaches
/// `cluster_balance_threshold` receive synthetic rows in proportion to their
/// minority sparsity. Each synthetic row interpolates between a minority row
/// and one of its nearest minority neighbours in the same cluster. With no
/// eligible cluster, plain SMOTE runs over the whole minority class.
/// Original rows are kept as an unchanged prefix.
pub fn kmeans_smote(d: &Dataset, p: &SmoteParams) -> Result<Dataset> {
    p.validate()?;
    let counts = d.class_counts();
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::SingleClass);
    }
    let mut out = d.clone();
    if counts[0] == counts[1] {
        return Ok(out);
    }
    let minority_label: u8 = if counts[0] < counts[1] { 0 } else { 1 };
    let needed = counts[0].abs_diff(counts[1]);

    let points = d.features();
    let k = p.n_clusters.min(d.len());
    let clustering = kmeans(points.view(), k, seed::derive_seed(p.seed, 0))?;

    let mut cluster_rows: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in clustering.assignments.iter().enumerate() {
        cluster_rows[c].push(i);
    }
    let minority_of = |rows: &[usize]| -> Vec<[f64; 7]> {
        rows.iter()
            .filter(|&&i| d.rows[i].label == minority_label)
            .map(|&i| d.rows[i].features())
            .collect()
    };

    let mut groups: Vec<Group> = cluster_rows
        .iter()
        .filter(|rows| !rows.is_empty())
        .filter_map(|rows| {
            let minority = minority_of(rows);
            let fraction = minority.len() as f64 / rows.len() as f64;
            (!minority.is_empty() && fraction >= p.cluster_balance_threshold)
                .then(|| Group::new(minority, p.k_neighbors))
        })
        .collect();
    if groups.is_empty() {
        let all: Vec<usize> = (0..d.len()).collect();
        groups.push(Group::new(minority_of(&all), p.k_neighbors));
    }

    let sparsity: Vec<f64> = groups
        .iter()
        .map(|g| g.sparsity(p.density_exponent))
        .collect();
    let total: f64 = sparsity.iter().sum();
    let weights: Vec<f64> = if total > 0.0 && total.is_finite() {
        sparsity.iter().map(|s| s / total).collect()
    } else {
        vec![1.0 / groups.len() as f64; groups.len()]
    };
    let shares = largest_remainder(needed, &weights);

    let mut rng = seed::rng(seed::derive_seed(p.seed, 1));
    for (group, &share) in groups.iter().zip(&shares) {
        for _ in 0..share {
            out.rows.push(FeatureRow::from_features(
                group.sample(&mut rng),
                minority_label,
            ));
        }
    }
    Ok(out)
}
