//! Syllable intelligibility toolkit.
//!
//! Seven similarity features between a control and an assessed recording,
//! outlier cleaning and KMeansSMOTE rebalancing, six binary classifiers,
//! blending ensembles and a seeded sweep over ensemble configurations.

pub mod blend;
pub mod dataprep;
mod error;
pub mod harness;
mod jsonfmt;
pub mod learners;
pub mod metrics;
pub mod seed;
pub mod signal;

pub use error::{Error, Result};
pub use jsonfmt::{from_json_str, to_json_string};
pub use metrics::{FeatureRow, MetricParams};
pub use signal::Sequence;
