//! Dataset files, splitting, scoring, synthetic data and the ensemble sweep.

pub mod dataset_io;
pub mod split;
pub mod sweep;
pub mod synth;

pub use dataset_io::{dataset_to_csv, load_dataset_csv, parse_dataset_csv, write_dataset_csv};
pub use split::{split, SplitSpec};
pub use sweep::{best_of, sweep, ReportRow, SweepConfig, SweepReport, VariantSummary};
pub use synth::{synth_dataset, SynthParams};

use crate::{Error, Result};

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[u8], truth: &[u8]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}
