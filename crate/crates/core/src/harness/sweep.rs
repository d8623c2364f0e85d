//! The ensemble-configuration sweep.
//!
//! One outer stratified split per run. The four dataset variants are built
//! from the training part only; the test part is never cleaned, rebalanced
//! or seen during fitting. For every variant the sweep scores each pool
//! classifier alone and every (meta kind, base subset) blend.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::accuracy;
use super::split::{split, SplitSpec};
use crate::blend::{fit_ensemble, BlendConfig, MetaFeatureMode};
use crate::dataprep::{make_variants, Dataset, SmoteParams, Variant};
use crate::learners::{fit, ClassifierKind, ClassifierSpec, Standardizer};
use crate::seed;
use crate::{Error, Result};

pub const REPORT_HEADER: &str = "variant,meta,bases,accuracy,n_train,n_test,seed";

const STREAM_SPLIT: u64 = 10;
const STREAM_SMOTE: u64 = 11;
const STREAM_BASELINE: u64 = 20;
const STREAM_ENSEMBLE: u64 = 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Classifiers used as baselines, meta-models and base-subset members.
    pub pool: Vec<ClassifierKind>,
    pub subset_sizes: Vec<usize>,
    /// `seed` is replaced by a derivation of the master seed.
    pub split: SplitSpec,
    /// `seed` is replaced by a derivation of the master seed.
    pub smote: SmoteParams,
    pub fence_k: f64,
    pub val_fraction: f64,
    pub meta_feature_mode: MetaFeatureMode,
    /// Z-score features with training-part statistics before fitting.
    pub zscore: bool,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            pool: ClassifierKind::DEFAULT_POOL.to_vec(),
            subset_sizes: vec![2, 3, 4],
            split: SplitSpec::default(),
            smote: SmoteParams::default(),
            fence_k: 1.5,
            val_fraction: 0.3,
            meta_feature_mode: MetaFeatureMode::Labels,
            zscore: true,
            seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        if self.pool.contains(&ClassifierKind::Constant) {
            return Err(Error::BadParam(
                "the constant classifier cannot join a sweep pool".into(),
            ));
        }
        if self.subset_sizes.contains(&0) {
            return Err(Error::BadParam("subset sizes must be >= 1".into()));
        }
        if !self.fence_k.is_finite() || self.fence_k < 0.0 {
            return Err(Error::BadParam("fence_k must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// Pool subsets in report order: by size as listed, then lexicographic
    /// by pool position.
    pub fn base_subsets(&self) -> Vec<Vec<usize>> {
        let n = self.pool.len();
        let mut out = Vec::new();
        for &size in &self.subset_sizes {
            if size > n {
                continue;
            }
            let mut combo: Vec<usize> = (0..size).collect();
            loop {
                out.push(combo.clone());
                let Some(i) = (0..size).rev().find(|&i| combo[i] != i + n - size) else {
                    break;
                };
                combo[i] += 1;
                for j in i + 1..size {
                    combo[j] = combo[j - 1] + 1;
                }
            }
        }
        out
    }

    fn seeded(&self) -> (SplitSpec, SmoteParams) {
        let split = SplitSpec {
            seed: seed::derive_path(self.seed, &[STREAM_SPLIT]),
            ..self.split
        };
        let smote = SmoteParams {
            seed: seed::derive_path(self.seed, &[STREAM_SMOTE]),
            ..self.smote
        };
        (split, smote)
    }
}

/// One evaluated configuration. Baselines have no bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub variant: Variant,
    pub meta: ClassifierKind,
    pub bases: Vec<ClassifierKind>,
    pub accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl ReportRow {
    pub fn is_baseline(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn bases_label(&self) -> String {
        self.bases
            .iter()
            .map(|k| k.as_str())
            .collect::<Vec<_>>()
            .join("+")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<ReportRow>,
    pub master_seed: u64,
    pub zscore: bool,
    pub n_rows: usize,
}

impl SweepReport {
    pub fn baselines(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.is_baseline())
    }

    pub fn ensembles(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.is_baseline())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.3},{},{},{}",
                r.variant,
                r.meta,
                r.bases_label(),
                r.accuracy,
                r.n_train,
                r.n_test,
                r.seed
            );
        }
        out
    }

    /// Aligned Markdown table preceded by the run settings and a per-variant
    /// best-of summary.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Sweep report\n");
        let _ = writeln!(out, "- master seed: {}", self.master_seed);
        let _ = writeln!(out, "- dataset rows: {}", self.n_rows);
        let _ = writeln!(
            out,
            "- feature z-scoring: {}",
            if self.zscore { "on" } else { "off" }
        );
        let _ = writeln!(
            out,
            "- rows with empty bases are single-classifier baselines\n"
        );

        if let Ok(summary) = best_of(self) {
            let _ = writeln!(out, "## Best per variant\n");
            let table: Vec<[String; 4]> = summary
                .iter()
                .map(|s| {
                    let fmt_row = |r: &Option<ReportRow>| match r {
                        Some(r) if r.is_baseline() => format!("{} ({:.3})", r.meta, r.accuracy),
                        Some(r) => format!("{} <- {} ({:.3})", r.meta, r.bases_label(), r.accuracy),
                        None => "-".into(),
                    };
                    [
                        s.variant.to_string(),
                        fmt_row(&s.best_baseline),
                        fmt_row(&s.best_ensemble),
                        s.improvement.map_or("-".into(), |d| format!("{d:+.3}")),
                    ]
                })
                .collect();
            write_table(
                &mut out,
                ["variant", "best baseline", "best ensemble", "difference"],
                &table,
            );
            out.push('\n');
        }

        let _ = writeln!(out, "## All configurations\n");
        let table: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.variant.to_string(),
                    r.meta.to_string(),
                    r.bases_label(),
                    format!("{:.3}", r.accuracy),
                    r.n_train.to_string(),
                    r.n_test.to_string(),
                    r.seed.to_string(),
                ]
            })
            .collect();
        write_table(
            &mut out,
            [
                "variant", "meta", "bases", "accuracy", "n_train", "n_test", "seed",
            ],
            &table,
        );
        out
    }

    /// Writes the CSV to `path` and the Markdown next to it with an `.md`
    /// extension.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))?;
        let md = path.with_extension("md");
        fs::write(&md, self.to_markdown()).map_err(|e| Error::io(&md, e))
    }
}

fn write_table<const N: usize>(out: &mut String, header: [&str; N], rows: &[[String; N]]) {
    let mut widths: [usize; N] = header.map(str::len);
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        format!("| {} |\n", padded.join(" | "))
    };
    out.push_str(&line(header.to_vec()));
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&line(rule.iter().map(String::as_str).collect()));
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
}

/// Outer split and the four variants built from its training part.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
    pub variants: [Dataset; 4],
}

pub fn prepare(d: &Dataset, cfg: &SweepConfig) -> Result<Prepared> {
    cfg.validate()?;
    let (split_spec, smote) = cfg.seeded();
    let (train, test) = split(d, &split_spec)?;
    let variants = make_variants(&train, &smote, cfg.fence_k)?;
    Ok(Prepared {
        train,
        test,
        variants,
    })
}

enum Job {
    Baseline { kind: usize },
    Ensemble { meta: usize, subset: Vec<usize> },
}

struct VariantData {
    variant: Variant,
    x_train: Array2<f64>,
    y_train: Vec<u8>,
    x_test: Array2<f64>,
}

/// Runs every configuration. Rows are ordered by variant, then baselines in
/// pool order, then ensembles by meta kind and base subset.
pub fn sweep(d: &Dataset, cfg: &SweepConfig) -> Result<SweepReport> {
    let prepared = prepare(d, cfg)?;
    let y_test = prepared.test.labels();
    let data: Vec<VariantData> = prepared
        .variants
        .iter()
        .map(|v| {
            let (mut x_train, mut x_test) = (v.features(), prepared.test.features());
            if cfg.zscore {
                let scaler = Standardizer::fit(x_train.view());
                x_train = scaler.apply(x_train.view());
                x_test = scaler.apply(x_test.view());
            }
            VariantData {
                variant: v.variant,
                x_train,
                y_train: v.labels(),
                x_test,
            }
        })
        .collect();

    let subsets = cfg.base_subsets();
    let mut jobs = Vec::new();
    for (vi, _) in data.iter().enumerate() {
        for kind in 0..cfg.pool.len() {
            jobs.push((vi, Job::Baseline { kind }));
        }
        for meta in 0..cfg.pool.len() {
            for subset in &subsets {
                jobs.push((
                    vi,
                    Job::Ensemble {
                        meta,
                        subset: subset.clone(),
                    },
                ));
            }
        }
    }

    let rows = jobs
        .par_iter()
        .map(|(vi, job)| {
            let v = &data[*vi];
            let (meta, bases, cfg_seed, predicted) = match job {
                Job::Baseline { kind } => {
                    let s =
                        seed::derive_path(cfg.seed, &[STREAM_BASELINE, *vi as u64, *kind as u64]);
                    let spec = ClassifierSpec::new(cfg.pool[*kind], s);
                    let model = fit(&spec, v.x_train.view(), &v.y_train)?;
                    (cfg.pool[*kind], vec![], s, model.predict(v.x_test.view())?)
                }
                Job::Ensemble { meta, subset } => {
                    let mask = subset.iter().fold(0u64, |m, &i| m | (1 << i));
                    let s = seed::derive_path(
                        cfg.seed,
                        &[STREAM_ENSEMBLE, *vi as u64, *meta as u64, mask],
                    );
                    let bases: Vec<ClassifierKind> = subset.iter().map(|&i| cfg.pool[i]).collect();
                    let pool: Vec<ClassifierSpec> = bases.iter().map(|&k| k.into()).collect();
                    let mut blend = BlendConfig::new(&pool, cfg.pool[*meta].into(), s)?;
                    blend.val_fraction = cfg.val_fraction;
                    blend.meta_feature_mode = cfg.meta_feature_mode;
                    let e = fit_ensemble(&blend, v.x_train.view(), &v.y_train)?;
                    (cfg.pool[*meta], bases, s, e.predict(v.x_test.view())?)
                }
            };
            Ok(ReportRow {
                variant: v.variant,
                meta,
                bases,
                accuracy: accuracy(&predicted, &y_test)?,
                n_train: v.y_train.len(),
                n_test: y_test.len(),
                seed: cfg_seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepReport {
        rows,
        master_seed: cfg.seed,
        zscore: cfg.zscore,
        n_rows: d.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub variant: Variant,
    pub best_baseline: Option<ReportRow>,
    pub best_ensemble: Option<ReportRow>,
    /// Best ensemble minus best baseline accuracy, when both exist.
    pub improvement: Option<f64>,
}

/// Higher accuracy, then fewer bases, then lexicographic kind names.
fn better(a: &ReportRow, b: &ReportRow) -> bool {
    let names = |r: &ReportRow| -> Vec<&'static str> {
        std::iter::once(r.meta.as_str())
            .chain(r.bases.iter().map(|k| k.as_str()))
            .collect()
    };
    match a.accuracy.total_cmp(&b.accuracy) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => (a.bases.len(), names(a)) < (b.bases.len(), names(b)),
    }
}

fn best<'a>(rows: impl Iterator<Item = &'a ReportRow>) -> Option<ReportRow> {
    rows.fold(None::<&ReportRow>, |acc, r| match acc {
        Some(b) if !better(r, b) => Some(b),
        _ => Some(r),
    })
    .cloned()
}

/// Per variant present in the report: best baseline, best ensemble and
/// their accuracy difference.
pub fn best_of(report: &SweepReport) -> Result<Vec<VariantSummary>> {
    if report.rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(Variant::ALL
        .into_iter()
        .filter(|v| report.rows.iter().any(|r| r.variant == *v))
        .map(|variant| {
            let of_variant = || report.rows.iter().filter(move |r| r.variant == variant);
            let best_baseline = best(of_variant().filter(|r| r.is_baseline()));
            let best_ensemble = best(of_variant().filter(|r| !r.is_baseline()));
            let improvement = match (&best_baseline, &best_ensemble) {
                (Some(b), Some(e)) => Some(e.accuracy - b.accuracy),
                _ => None,
            };
            VariantSummary {
                variant,
                best_baseline,
                best_ensemble,
                improvement,
            }
        })
        .collect())
}
