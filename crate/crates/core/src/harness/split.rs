use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataprep::Dataset;
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.25,
            stratified: true,
            seed: 0,
        }
    }
}

fn check_fraction(f: f64) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::BadParam(format!(
            "split fraction {f} must be in (0, 1)"
        )))
    }
}

/// Per class, `round(count * fraction)` rows (kept within `1..count`) go to
/// the second part. Both parts are returned in ascending index order.
pub fn stratified_indices(y: &[u8], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    check_fraction(fraction)?;
    let mut rng = seed::rng(seed);
    let (mut first, mut second) = (Vec::new(), Vec::new());
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 2 {
            return Err(Error::DegenerateSplit(format!(
                "class {class} has {} row(s); stratification needs at least 2",
                idx.len()
            )));
        }
        let take = ((idx.len() as f64 * fraction).round() as usize).clamp(1, idx.len() - 1);
        idx.shuffle(&mut rng);
        second.extend_from_slice(&idx[..take]);
        first.extend_from_slice(&idx[take..]);
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

pub fn random_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    check_fraction(fraction)?;
    if n < 2 {
        return Err(Error::DegenerateSplit(format!(
            "{n} row(s) cannot be split"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed::rng(seed));
    let take = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let mut second = idx[..take].to_vec();
    let mut first = idx[take..].to_vec();
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

/// Row indices `(train, test)` for `d` under `s`.
pub fn split_indices(d: &Dataset, s: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if s.stratified {
        stratified_indices(&d.labels(), s.test_fraction, s.seed)
    } else {
        random_indices(d.len(), s.test_fraction, s.seed)
    }
}

pub fn split(d: &Dataset, s: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(d, s)?;
    Ok((d.subset(&train), d.subset(&test)))
}
