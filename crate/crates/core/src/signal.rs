//! Recording ingestion, normalization and DTW length equalization.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::metrics::dtw_cost_matrix;
use crate::{Error, Result};

/// A finite series of real-valued samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sequence {
    samples: Vec<f64>,
    sample_rate: Option<u32>,
}

impl Sequence {
    /// Fails with [`Error::NonFiniteFeature`] if any sample is NaN or infinite.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature);
        }
        Ok(Sequence {
            samples,
            sample_rate: None,
        })
    }

    pub fn with_sample_rate(mut self, rate: u32) -> Self {
        self.sample_rate = Some(rate);
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> Option<u32> {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    fn derived(&self, samples: Vec<f64>) -> Sequence {
        Sequence {
            samples,
            sample_rate: self.sample_rate,
        }
    }
}

impl AsRef<[f64]> for Sequence {
    fn as_ref(&self) -> &[f64] {
        &self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessParams {
    pub z_normalize: bool,
    /// `None` skips envelope reduction.
    pub envelope_window: Option<usize>,
    pub envelope_hop: usize,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        PreprocessParams {
            z_normalize: true,
            envelope_window: Some(256),
            envelope_hop: 128,
        }
    }
}

impl PreprocessParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(window) = self.envelope_window {
            if window == 0 || self.envelope_hop == 0 {
                return Err(Error::BadParam(
                    "envelope window and hop must be >= 1".into(),
                ));
            }
            if self.envelope_hop > window {
                return Err(Error::BadParam(
                    "envelope hop must not exceed window".into(),
                ));
            }
        }
        Ok(())
    }

    /// read → z_normalize → envelope.
    pub fn apply(&self, s: &Sequence) -> Result<Sequence> {
        self.validate()?;
        let s = if self.z_normalize {
            z_normalize(s)?
        } else {
            s.clone()
        };
        match self.envelope_window {
            Some(window) => envelope(&s, window, self.envelope_hop),
            None => Ok(s),
        }
    }
}

/// Reads a RIFF/WAVE PCM 16-bit mono file, scaling samples by 1/32768.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Sequence> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = hound::WavReader::new(BufReader::new(file)).map_err(map_hound)?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat(format!(
            "{:?} {}-bit samples, only 16-bit PCM is supported",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    if spec.channels != 1 {
        return Err(Error::UnsupportedFormat(format!(
            "{} channels, only mono is supported",
            spec.channels
        )));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(map_hound)?;
    Ok(Sequence::new(samples)?.with_sample_rate(spec.sample_rate))
}

fn map_hound(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::Format("truncated file".into())
        }
        hound::Error::IoError(io) => Error::Format(io.to_string()),
        hound::Error::FormatError(msg) => Error::Format(msg.into()),
        hound::Error::Unsupported => Error::UnsupportedFormat("non-PCM encoding".into()),
        other => Error::Format(other.to_string()),
    }
}

/// One real number per line; an optional first line `sample` is skipped.
pub fn read_sequence_csv(path: impl AsRef<Path>) -> Result<Sequence> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sequence_csv(&text)
}

pub fn parse_sequence_csv(text: &str) -> Result<Sequence> {
    let mut samples = Vec::new();
    let n_lines = text.lines().count();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if idx == 0 && line == "sample" {
            continue;
        }
        if line.is_empty() && idx + 1 == n_lines {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            message: format!("not a number: {line:?}"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line: idx + 1,
                message: "non-finite value".into(),
            });
        }
        samples.push(value);
    }
    Sequence::new(samples)
}

fn mean_and_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Shift to zero mean and scale to unit population standard deviation.
pub fn z_normalize(s: &Sequence) -> Result<Sequence> {
    let x = s.samples();
    if x.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let (mean, sd) = mean_and_sd(x);
    if sd == 0.0 || !sd.is_finite() {
        return Err(Error::ZeroVariance);
    }
    Ok(s.derived(x.iter().map(|v| (v - mean) / sd).collect()))
}

/// Windowed RMS: `out[k] = rms(x[k*hop .. k*hop + window])`.
pub fn envelope(s: &Sequence, window: usize, hop: usize) -> Result<Sequence> {
    if window == 0 || hop == 0 {
        return Err(Error::BadParam(
            "envelope window and hop must be >= 1".into(),
        ));
    }
    let x = s.samples();
    if x.len() < window {
        return Err(Error::TooShort {
            needed: window,
            got: x.len(),
        });
    }
    let frames = (x.len() - window) / hop + 1;
    let out = (0..frames)
        .map(|k| {
            let frame = &x[k * hop..k * hop + window];
            (frame.iter().map(|v| v * v).sum::<f64>() / window as f64).sqrt()
        })
        .collect();
    Ok(s.derived(out))
}

/// Expands `a` and `b` along one optimal DTW warping path so both have the
/// same length.
///
/// Backtracking from `(n, m)` prefers the diagonal predecessor, then the one
/// that advanced `a`, then the one that advanced `b`.
pub fn dtw_align(a: &Sequence, b: &Sequence) -> Result<(Sequence, Sequence)> {
    let path = dtw_path(a.samples(), b.samples())?;
    let (xa, xb) = (a.samples(), b.samples());
    let out_a = path.iter().map(|&(i, _)| xa[i]).collect();
    let out_b = path.iter().map(|&(_, j)| xb[j]).collect();
    Ok((a.derived(out_a), b.derived(out_b)))
}

/// Zero-based `(i, j)` index pairs of the optimal warping path, start to end.
pub fn dtw_path(a: &[f64], b: &[f64]) -> Result<Vec<(usize, usize)>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (n, m) = (a.len(), b.len());
    let d = dtw_cost_matrix(a, b);
    let at = |i: usize, j: usize| d[i * (m + 1) + j];

    let mut path = Vec::with_capacity(n + m - 1);
    let (mut i, mut j) = (n, m);
    loop {
        path.push((i - 1, j - 1));
        if i == 1 && j == 1 {
            break;
        }
        let diag = at(i - 1, j - 1);
        let up = at(i - 1, j);
        let left = at(i, j - 1);
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    path.reverse();
    Ok(path)
}
