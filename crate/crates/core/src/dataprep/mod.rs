//! Dataset variants: quartile-fence cleaning and KMeansSMOTE rebalancing.

mod kmeans;
mod smote;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use kmeans::{kmeans, KMeansResult};
pub use smote::{kmeans_smote, SmoteParams};

use crate::metrics::FeatureRow;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Original,
    Cleaned,
    Rebalanced,
    CleanedRebalanced,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Original,
        Variant::Cleaned,
        Variant::Rebalanced,
        Variant::CleanedRebalanced,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Cleaned => "cleaned",
            Variant::Rebalanced => "rebalanced",
            Variant::CleanedRebalanced => "cleaned_rebalanced",
        }
    }

    fn after_cleaning(self) -> Variant {
        match self {
            Variant::Original | Variant::Cleaned => Variant::Cleaned,
            Variant::Rebalanced | Variant::CleanedRebalanced => Variant::CleanedRebalanced,
        }
    }

    fn after_rebalancing(self) -> Variant {
        match self {
            Variant::Original | Variant::Rebalanced => Variant::Rebalanced,
            Variant::Cleaned | Variant::CleanedRebalanced => Variant::CleanedRebalanced,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::BadParam(format!("unknown variant {s:?}")))
    }
}

/// Ordered feature rows with a variant tag and a free-form phoneme tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<FeatureRow>,
    pub variant: Variant,
    pub phoneme_tag: String,
}

impl Dataset {
    pub fn new(rows: Vec<FeatureRow>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| !r.is_valid()) {
            return Err(if bad.label > 1 {
                Error::Label {
                    line: 0,
                    value: bad.label.to_string(),
                }
            } else {
                Error::NonFiniteFeature
            });
        }
        Ok(Dataset {
            rows,
            variant: Variant::Original,
            phoneme_tag: String::new(),
        })
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.phoneme_tag = tag.into();
        self
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `[class 0 count, class 1 count]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.rows.iter().filter(|r| r.label == 1).count();
        [self.rows.len() - ones, ones]
    }

    pub fn features(&self) -> Array2<f64> {
        let mut x = Array2::zeros((self.rows.len(), FeatureRow::N_FEATURES));
        for (mut out, row) in x.rows_mut().into_iter().zip(&self.rows) {
            for (o, v) in out.iter_mut().zip(row.features()) {
                *o = v;
            }
        }
        x
    }

    pub fn labels(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i]).collect(),
            variant: self.variant,
            phoneme_tag: self.phoneme_tag.clone(),
        }
    }
}

/// Linear-interpolation quantile of a sorted slice at fractional index
/// `(n - 1) * q`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Per-column `[Q1 - k*IQR, Q3 + k*IQR]`.
pub fn tukey_fences(d: &Dataset, fence_k: f64) -> Vec<(f64, f64)> {
    (0..FeatureRow::N_FEATURES)
        .map(|col| {
            let mut column: Vec<f64> = d.rows.iter().map(|r| r.features()[col]).collect();
            column.sort_by(f64::total_cmp);
            let q1 = quantile_sorted(&column, 0.25);
            let q3 = quantile_sorted(&column, 0.75);
            let iqr = q3 - q1;
            (q1 - fence_k * iqr, q3 + fence_k * iqr)
        })
        .collect()
}

/// Drops every row with any feature strictly outside its column's Tukey
/// fences. Fences are computed once over all rows, regardless of class.
pub fn iqr_clean(d: &Dataset, fence_k: f64) -> Dataset {
    let rows = if d.is_empty() {
        Vec::new()
    } else {
        let fences = tukey_fences(d, fence_k);
        d.rows
            .iter()
            .filter(|r| {
                r.features()
                    .iter()
                    .zip(&fences)
                    .all(|(v, (lo, hi))| v >= lo && v <= hi)
            })
            .copied()
            .collect()
    };
    Dataset {
        rows,
        variant: d.variant.after_cleaning(),
        phoneme_tag: d.phoneme_tag.clone(),
    }
}

/// Applies KMeansSMOTE and retags the variant.
pub fn rebalance(d: &Dataset, p: &SmoteParams) -> Result<Dataset> {
    let mut out = kmeans_smote(d, p)?;
    out.variant = d.variant.after_rebalancing();
    Ok(out)
}

/// The four training variants, in [`Variant::ALL`] order.
pub fn make_variants(d: &Dataset, p: &SmoteParams, fence_k: f64) -> Result<[Dataset; 4]> {
    let mut original = d.clone();
    original.variant = Variant::Original;
    let cleaned = iqr_clean(&original, fence_k);
    let rebalanced = rebalance(&original, p)?;
    let cleaned_rebalanced = rebalance(&cleaned, p)?;
    Ok([original, cleaned, rebalanced, cleaned_rebalanced])
}
