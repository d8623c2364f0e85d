//! Synthetic feature datasets shaped like real metric rows.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataprep::Dataset;
use crate::metrics::FeatureRow;
use crate::seed;
use crate::{Error, Result};

/// Nominal location and spread of each feature, in column order.
const LOCATION: [f64; 7] = [40.0, 0.6, 6.0, 0.5, 30.0, 0.5, 35.0];
const SPREAD: [f64; 7] = [8.0, 0.1, 1.2, 0.08, 6.0, 0.08, 7.0];
/// Intelligible rows (class 1) sit at smaller distances and higher
/// correlation / common-subsequence similarity.
const DIRECTION: [f64; 7] = [-1.0, 1.0, -1.0, -1.0, -1.0, 1.0, -1.0];
/// Correlation of the redundant pairs dtw↔minkowski and edr↔lcss.
const PAIR_CORRELATION: f64 = 0.8;

const DISTANCE_BLOCK: [usize; 4] = [0, 2, 4, 6];
const EDIT_BLOCK: [usize; 2] = [3, 5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub rows: usize,
    /// Fraction of class-0 rows, in (0, 0.5).
    pub minority_fraction: f64,
    /// Per-feature class mean gap in units of the within-class standard
    /// deviation.
    pub separation: f64,
    /// Extra noise (in within-class standard deviations) added to the
    /// distance features where the correlation latent is positive and to
    /// the edit features elsewhere. Zero disables it.
    pub region_noise: f64,
    pub seed: u64,
}

impl SynthParams {
    pub fn new(rows: usize, minority_fraction: f64, separation: f64, seed: u64) -> Self {
        SynthParams {
            rows,
            minority_fraction,
            separation,
            region_noise: 0.0,
            seed,
        }
    }

    pub fn with_region_noise(mut self, noise: f64) -> Self {
        self.region_noise = noise;
        self
    }

    pub fn generate(&self) -> Result<Dataset> {
        if self.rows < 10 {
            return Err(Error::BadParam(format!(
                "rows = {} must be >= 10",
                self.rows
            )));
        }
        if !(self.minority_fraction > 0.0 && self.minority_fraction < 0.5) {
            return Err(Error::BadParam(
                "minority_fraction must be in (0, 0.5)".into(),
            ));
        }
        if !self.separation.is_finite() || self.separation < 0.0 {
            return Err(Error::BadParam("separation must be finite and >= 0".into()));
        }
        if !self.region_noise.is_finite() || self.region_noise < 0.0 {
            return Err(Error::BadParam(
                "region_noise must be finite and >= 0".into(),
            ));
        }

        let mut rng = seed::rng(self.seed);
        let n0 = (self.rows as f64 * self.minority_fraction).round() as usize;
        let mut labels: Vec<u8> = std::iter::repeat_n(0, n0)
            .chain(std::iter::repeat_n(1, self.rows - n0))
            .collect();
        labels.shuffle(&mut rng);

        let pair_rest = (1.0 - PAIR_CORRELATION * PAIR_CORRELATION).sqrt();
        let rows = labels
            .into_iter()
            .map(|label| {
                let mut z: [f64; 7] = std::array::from_fn(|_| rng.sample(StandardNormal));
                z[2] = PAIR_CORRELATION * z[0] + pair_rest * z[2];
                z[5] = PAIR_CORRELATION * z[3] + pair_rest * z[5];
                if self.region_noise > 0.0 {
                    let block: &[usize] = if z[1] > 0.0 {
                        &DISTANCE_BLOCK
                    } else {
                        &EDIT_BLOCK
                    };
                    for &f in block {
                        let e: f64 = rng.sample(StandardNormal);
                        z[f] += self.region_noise * e;
                    }
                }
                let half_gap = if label == 1 { 0.5 } else { -0.5 } * self.separation;
                let features = std::array::from_fn(|f| {
                    LOCATION[f] + SPREAD[f] * (DIRECTION[f] * half_gap + z[f])
                });
                FeatureRow::from_features(features, label)
            })
            .collect();
        Ok(Dataset::new(rows)?.with_tag("synthetic"))
    }
}

/// Two Gaussian class blobs over the seven features.
pub fn synth_dataset(
    rows: usize,
    minority_fraction: f64,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    SynthParams::new(rows, minority_fraction, separation, seed).generate()
}
