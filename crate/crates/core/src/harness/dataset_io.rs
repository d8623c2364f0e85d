use std::fs;
use std::path::Path;

use crate::dataprep::Dataset;
use crate::metrics::FeatureRow;
use crate::{Error, Result};

pub const DATASET_HEADER: &str = "dtw,corr,minkowski,edr,erp,lcss,msm,label";

pub fn load_dataset_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset_csv(&text)
}

/// Parses the dataset CSV. The header must match [`DATASET_HEADER`] exactly.
pub fn parse_dataset_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| Error::Format(e.to_string()))?,
        None => return Err(Error::Format("missing header".into())),
    };
    let header: Vec<&str> = header.iter().collect();
    if header.join(",") != DATASET_HEADER {
        return Err(Error::Format(format!(
            "expected header `{DATASET_HEADER}`, found `{}`",
            header.join(",")
        )));
    }

    let mut rows = Vec::new();
    for (idx, rec) in records.enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.len() != 8 {
            return Err(Error::Parse {
                line,
                message: format!("expected 8 fields, found {}", rec.len()),
            });
        }
        let mut features = [0.0f64; 7];
        for (f, field) in features.iter_mut().zip(rec.iter()) {
            *f = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("not a number: {field:?}"),
            })?;
            if !f.is_finite() {
                return Err(Error::NonFiniteFeature);
            }
        }
        let label = match &rec[7] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::Label {
                    line,
                    value: other.to_string(),
                })
            }
        };
        rows.push(FeatureRow::from_features(features, label));
    }
    Dataset::new(rows)
}

/// Floats use the shortest representation that parses back bit-exact.
pub fn dataset_to_csv(d: &Dataset) -> String {
    let mut out = String::with_capacity(64 * (d.len() + 1));
    out.push_str(DATASET_HEADER);
    out.push('\n');
    for row in &d.rows {
        for v in row.features() {
            out.push_str(&format!("{v:?},"));
        }
        out.push_str(&format!("{}\n", row.label));
    }
    out
}

pub fn write_dataset_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, dataset_to_csv(d)).map_err(|e| Error::io(path, e))
}
