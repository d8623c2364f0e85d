//! The seven similarity measures and the per-pair feature row.
//!
//! The dynamic-programming kernels keep two rolling rows sized by the shorter
//! input, so memory is `O(min(n, m))` and time `O(n * m)`.

use serde::{Deserialize, Serialize};

use crate::signal::{dtw_align, Sequence};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricParams {
    pub minkowski_p: f64,
    pub edr_epsilon: f64,
    pub lcss_epsilon: f64,
    pub erp_gap: f64,
    pub msm_cost: f64,
    /// Sakoe-Chiba half-width; `None` is unconstrained.
    pub dtw_band: Option<usize>,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            minkowski_p: 2.0,
            edr_epsilon: 0.25,
            lcss_epsilon: 0.25,
            erp_gap: 0.0,
            msm_cost: 1.0,
            dtw_band: None,
        }
    }
}

impl MetricParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.minkowski_p,
            self.edr_epsilon,
            self.lcss_epsilon,
            self.erp_gap,
            self.msm_cost,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::BadParam("metric parameters must be finite".into()));
        }
        if self.minkowski_p < 1.0 {
            return Err(Error::BadParam("minkowski_p must be >= 1".into()));
        }
        if self.edr_epsilon < 0.0 || self.lcss_epsilon < 0.0 {
            return Err(Error::BadParam("epsilon must be >= 0".into()));
        }
        if self.msm_cost <= 0.0 {
            return Err(Error::BadParam("msm_cost must be > 0".into()));
        }
        Ok(())
    }
}

/// Seven metric values for one (control, assessed) pair plus the class label
/// (1 = intelligible, 0 = distorted).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub dtw: f64,
    pub corr: f64,
    pub minkowski: f64,
    pub edr: f64,
    pub erp: f64,
    pub lcss: f64,
    pub msm: f64,
    pub label: u8,
}

impl FeatureRow {
    pub const N_FEATURES: usize = 7;
    pub const NAMES: [&'static str; 7] = ["dtw", "corr", "minkowski", "edr", "erp", "lcss", "msm"];

    pub fn features(&self) -> [f64; 7] {
        [
            self.dtw,
            self.corr,
            self.minkowski,
            self.edr,
            self.erp,
            self.lcss,
            self.msm,
        ]
    }

    pub fn from_features(f: [f64; 7], label: u8) -> Self {
        FeatureRow {
            dtw: f[0],
            corr: f[1],
            minkowski: f[2],
            edr: f[3],
            erp: f[4],
            lcss: f[5],
            msm: f[6],
            label,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.features().iter().all(|v| v.is_finite()) && self.label <= 1
    }
}

fn ensure_non_empty(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        Err(Error::EmptyInput)
    } else {
        Ok(())
    }
}

/// Orders the pair so the second slice is the shorter one. Every measure
/// here is symmetric, so callers may swap freely.
fn shorter_last<'a>(a: &'a [f64], b: &'a [f64]) -> (&'a [f64], &'a [f64]) {
    if b.len() <= a.len() {
        (a, b)
    } else {
        (b, a)
    }
}

/// Full `(n+1) x (m+1)` accumulated-cost table, row-major, for path
/// recovery. Row and column 0 are the +inf boundary with `D[0][0] = 0`.
pub(crate) fn dtw_cost_matrix(a: &[f64], b: &[f64]) -> Vec<f64> {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut d = vec![f64::INFINITY; (n + 1) * w];
    d[0] = 0.0;
    for i in 1..=n {
        for j in 1..=m {
            let best = d[(i - 1) * w + j - 1]
                .min(d[(i - 1) * w + j])
                .min(d[i * w + j - 1]);
            d[i * w + j] = (a[i - 1] - b[j - 1]).abs() + best;
        }
    }
    d
}

/// DTW path cost with local cost `|a_i - b_j|`, optionally restricted to a
/// Sakoe-Chiba band of half-width `band`.
pub fn dtw_distance(a: &[f64], b: &[f64], band: Option<usize>) -> Result<f64> {
    ensure_non_empty(a, b)?;
    let diff = a.len().abs_diff(b.len());
    if let Some(band) = band {
        if band < diff {
            return Err(Error::BandTooNarrow { band, diff });
        }
    }
    let (a, b) = shorter_last(a, b);
    let (n, m) = (a.len(), b.len());
    let band = band.unwrap_or(n.max(m));

    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        let lo = i.saturating_sub(band).max(1);
        let hi = (i + band).min(m);
        curr.fill(f64::INFINITY);
        for j in lo..=hi {
            let best = prev[j - 1].min(prev[j]).min(curr[j - 1]);
            curr[j] = (a[i - 1] - b[j - 1]).abs() + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m])
}

pub fn minkowski_distance(a: &[f64], b: &[f64], p: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if !p.is_finite() || p < 1.0 {
        return Err(Error::BadParam(format!("minkowski order {p} must be >= 1")));
    }
    ensure_non_empty(a, b)?;
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Pearson correlation clamped to `[-1, 1]`.
pub fn correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    ensure_non_empty(a, b)?;
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Edit distance on real sequences: a substitution is free when the values
/// are within `epsilon`, every other edit costs 1.
pub fn edr(a: &[f64], b: &[f64], epsilon: f64) -> usize {
    let (a, b) = shorter_last(a, b);
    let m = b.len();
    let mut prev: Vec<usize> = (0..=m).collect();
    let mut curr = vec![0usize; m + 1];
    for (i, &x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from((x - y).abs() > epsilon);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[m]
}

/// Edit distance with real penalty; gaps cost the distance to `gap`.
pub fn erp(a: &[f64], b: &[f64], gap: f64) -> f64 {
    let (a, b) = shorter_last(a, b);
    let m = b.len();
    let mut prev = vec![0.0; m + 1];
    for j in 1..=m {
        prev[j] = prev[j - 1] + (b[j - 1] - gap).abs();
    }
    let mut curr = vec![0.0; m + 1];
    for &x in a {
        let gx = (x - gap).abs();
        curr[0] = prev[0] + gx;
        for (j, &y) in b.iter().enumerate() {
            let sub = prev[j] + (x - y).abs();
            let del = prev[j + 1] + gx;
            let ins = curr[j] + (y - gap).abs();
            curr[j + 1] = sub.min(del).min(ins);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[m]
}

/// Longest common subsequence length where values within `epsilon` match.
pub fn lcss_length(a: &[f64], b: &[f64], epsilon: f64) -> usize {
    let (a, b) = shorter_last(a, b);
    let m = b.len();
    let mut prev = vec![0usize; m + 1];
    let mut curr = vec![0usize; m + 1];
    for &x in a {
        for (j, &y) in b.iter().enumerate() {
            curr[j + 1] = if (x - y).abs() <= epsilon {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[m]
}

/// Split/merge cost of inserting `x` after `prev` against the other
/// sequence's value `other`.
#[inline]
fn msm_split_merge(x: f64, prev: f64, other: f64, c: f64) -> f64 {
    if (prev <= x && x <= other) || (prev >= x && x >= other) {
        c
    } else {
        c + (x - prev).abs().min((x - other).abs())
    }
}

/// Move-split-merge distance with split/merge cost `c`.
pub fn msm(a: &[f64], b: &[f64], c: f64) -> Result<f64> {
    ensure_non_empty(a, b)?;
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::BadParam(format!("msm cost {c} must be > 0")));
    }
    let (a, b) = shorter_last(a, b);
    let m = b.len();

    let mut prev = vec![0.0; m];
    prev[0] = (a[0] - b[0]).abs();
    for j in 1..m {
        prev[j] = prev[j - 1] + msm_split_merge(b[j], b[j - 1], a[0], c);
    }
    let mut curr = vec![0.0; m];
    for i in 1..a.len() {
        let (x, x_prev) = (a[i], a[i - 1]);
        curr[0] = prev[0] + msm_split_merge(x, x_prev, b[0], c);
        for j in 1..m {
            let mv = prev[j - 1] + (x - b[j]).abs();
            let split_a = prev[j] + msm_split_merge(x, x_prev, b[j], c);
            let split_b = curr[j - 1] + msm_split_merge(b[j], b[j - 1], x, c);
            curr[j] = mv.min(split_a).min(split_b);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m - 1])
}

/// All seven measures for one pair. The label is left at 0 for the caller
/// to set.
///
/// Minkowski and correlation run on the DTW-aligned pair; the elastic
/// measures consume the raw sequences.
pub fn feature_vector(
    control: &Sequence,
    assessed: &Sequence,
    params: &MetricParams,
) -> Result<FeatureRow> {
    params.validate()?;
    let (a, b) = (control.samples(), assessed.samples());
    ensure_non_empty(a, b)?;

    let dtw = dtw_distance(a, b, params.dtw_band)?;
    let (aligned_a, aligned_b) = dtw_align(control, assessed)?;
    let minkowski =
        minkowski_distance(aligned_a.samples(), aligned_b.samples(), params.minkowski_p)?;
    let corr = correlation(aligned_a.samples(), aligned_b.samples())?;
    let edr_norm = edr(a, b, params.edr_epsilon) as f64 / a.len().max(b.len()) as f64;
    let lcss_norm = lcss_length(a, b, params.lcss_epsilon) as f64 / a.len().min(b.len()) as f64;

    Ok(FeatureRow {
        dtw,
        corr,
        minkowski,
        edr: edr_norm,
        erp: erp(a, b, params.erp_gap),
        lcss: lcss_norm,
        msm: msm(a, b, params.msm_cost)?,
        label: 0,
    })
}
