use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use syllablend::blend::{
    fit_ensemble, fit_ensemble_scaled, BlendConfig, BlendEnsemble, MetaFeatureMode,
};
use syllablend::dataprep::{iqr_clean, rebalance, SmoteParams};
use syllablend::harness::{
    accuracy, best_of, load_dataset_csv, sweep, write_dataset_csv, SplitSpec, SweepConfig,
    SynthParams,
};
use syllablend::learners::{ClassifierKind, ClassifierSpec, Model};
use syllablend::metrics::feature_vector;
use syllablend::signal::{read_sequence_csv, read_wav, PreprocessParams};
use syllablend::{Error, FeatureRow, MetricParams, Sequence};

#[derive(Parser)]
#[command(
    name = "syllablend",
    version,
    about = "Syllable similarity features, dataset preparation and blending ensembles"
)]
struct Cli {
    /// JSON file with default settings; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the seven similarity features for one recording pair.
    Metrics(MetricsArgs),
    /// Clean or rebalance a dataset file.
    #[command(subcommand)]
    Prep(PrepCommand),
    /// Fit a blending ensemble and save it as JSON.
    Train(TrainArgs),
    /// Report the accuracy of a saved model or ensemble on a dataset.
    Eval(EvalArgs),
    /// Evaluate every baseline and ensemble configuration.
    Sweep(SweepArgs),
    /// Write a synthetic feature dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct MetricsArgs {
    /// Reference recording (.wav, or one-column CSV of samples).
    #[arg(long)]
    control: PathBuf,
    /// Recording to compare against the reference.
    #[arg(long)]
    assessed: PathBuf,
    /// Measure parameters as inline JSON or a path to a JSON file.
    #[arg(long, value_name = "JSON")]
    params: Option<String>,
    /// Append a label column (0 or 1), producing a dataset row.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    label: Option<u8>,
    #[arg(long)]
    no_header: bool,
    /// Skip z-normalization of both recordings.
    #[arg(long)]
    no_zscore: bool,
    /// RMS envelope window in samples; 0 disables the envelope.
    #[arg(long)]
    envelope_window: Option<usize>,
    #[arg(long)]
    envelope_hop: Option<usize>,
}

#[derive(Subcommand)]
enum PrepCommand {
    /// Drop rows outside the per-feature quartile fences.
    Clean {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        fence_k: Option<f64>,
    },
    /// Oversample the minority class with KMeansSMOTE.
    Rebalance {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        smote: SmoteFlags,
    },
}

#[derive(Args)]
struct SmoteFlags {
    #[arg(long)]
    clusters: Option<usize>,
    /// Minimum minority fraction for a cluster to receive samples.
    #[arg(long)]
    balance_threshold: Option<f64>,
    #[arg(long)]
    neighbors: Option<usize>,
    #[arg(long)]
    density_exponent: Option<f64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Kind of the meta-model.
    #[arg(long)]
    meta: ClassifierKind,
    /// Comma-separated base model kinds.
    #[arg(long, value_delimiter = ',', required = true)]
    bases: Vec<ClassifierKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Fraction of the training rows held out to fit the meta-model.
    #[arg(long)]
    val_fraction: Option<f64>,
    #[arg(long, value_parser = parse_mode)]
    meta_features: Option<MetaFeatureMode>,
    /// Train on raw features instead of z-scored ones.
    #[arg(long)]
    no_zscore: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV report path; a Markdown table is written next to it.
    #[arg(long)]
    report: PathBuf,
    #[arg(long, value_delimiter = ',')]
    subset_sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pool: Option<Vec<ClassifierKind>>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    no_zscore: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    rows: usize,
    /// Fraction of class-0 rows.
    #[arg(long, default_value_t = 0.3)]
    minority: f64,
    #[arg(long, default_value_t = 2.0)]
    separation: f64,
    #[arg(long, default_value_t = 0.0)]
    region_noise: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_mode(s: &str) -> Result<MetaFeatureMode, String> {
    match s {
        "labels" => Ok(MetaFeatureMode::Labels),
        "scores" => Ok(MetaFeatureMode::Scores),
        other => Err(format!(
            "unknown meta-feature mode `{other}` (labels, scores)"
        )),
    }
}

/// Settings file. Every section is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    seed: Option<u64>,
    metrics: MetricParams,
    preprocess: Option<PreprocessParams>,
    fence_k: Option<f64>,
    smote: Option<SmoteParams>,
    split: Option<SplitSpec>,
    sweep: Option<SweepSection>,
    train: TrainSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepSection {
    pool: Option<Vec<ClassifierKind>>,
    subset_sizes: Option<Vec<usize>>,
    val_fraction: Option<f64>,
    meta_feature_mode: Option<MetaFeatureMode>,
    zscore: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrainSection {
    val_fraction: Option<f64>,
    meta_feature_mode: Option<MetaFeatureMode>,
    zscore: Option<bool>,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BadParam(msg) => Failure::Usage(msg),
            Error::EmptyPool => Failure::Usage(e.to_string()),
            other => Failure::Data(other),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let config = match &cli.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Metrics(args) => metrics(args, &config),
        Command::Prep(PrepCommand::Clean {
            input,
            out,
            fence_k,
        }) => {
            let d = load_dataset_csv(&input)?;
            let k = fence_k.or(config.fence_k).unwrap_or(1.5);
            if !k.is_finite() || k < 0.0 {
                return Err(Failure::Usage("--fence-k must be finite and >= 0".into()));
            }
            let cleaned = iqr_clean(&d, k);
            write_dataset_csv(&cleaned, &out)?;
            println!("kept {} of {} rows", cleaned.len(), d.len());
            Ok(())
        }
        Command::Prep(PrepCommand::Rebalance {
            input,
            out,
            seed,
            smote,
        }) => {
            let d = load_dataset_csv(&input)?;
            let mut p = config.smote.unwrap_or_default();
            p.seed = require_seed(seed, &config)?;
            apply_smote_flags(&mut p, &smote);
            let balanced = rebalance(&d, &p)?;
            write_dataset_csv(&balanced, &out)?;
            let [c0, c1] = balanced.class_counts();
            println!("{} rows ({c0} class 0, {c1} class 1)", balanced.len());
            Ok(())
        }
        Command::Train(args) => train(args, &config),
        Command::Eval(args) => eval(args),
        Command::Sweep(args) => run_sweep(args, &config),
        Command::Synth(args) => {
            let seed = require_seed(args.seed, &config)?;
            let d = SynthParams::new(args.rows, args.minority, args.separation, seed)
                .with_region_noise(args.region_noise)
                .generate()?;
            write_dataset_csv(&d, &args.out)?;
            let [c0, c1] = d.class_counts();
            println!("{} rows ({c0} class 0, {c1} class 1)", d.len());
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> Result<Config, Failure> {
    let text = fs::read_to_string(path).map_err(|e| {
        Failure::Data(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Data(Error::Format(format!("{}: {e}", path.display()))))
}

fn require_seed(flag: Option<u64>, config: &Config) -> Result<u64, Failure> {
    flag.or(config.seed)
        .ok_or_else(|| Failure::Usage("a seed is required (--seed or \"seed\" in --config)".into()))
}

fn apply_smote_flags(p: &mut SmoteParams, f: &SmoteFlags) {
    if let Some(v) = f.clusters {
        p.n_clusters = v;
    }
    if let Some(v) = f.balance_threshold {
        p.cluster_balance_threshold = v;
    }
    if let Some(v) = f.neighbors {
        p.k_neighbors = v;
    }
    if let Some(v) = f.density_exponent {
        p.density_exponent = v;
    }
}

fn read_recording(path: &Path) -> Result<(Sequence, bool), Failure> {
    let is_wav = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    let s = if is_wav {
        read_wav(path)?
    } else {
        read_sequence_csv(path)?
    };
    Ok((s, is_wav))
}

fn metrics(args: MetricsArgs, config: &Config) -> Outcome {
    let mut params = config.metrics;
    if let Some(p) = &args.params {
        let text = if p.trim_start().starts_with('{') {
            p.clone()
        } else {
            fs::read_to_string(p).map_err(|e| {
                Failure::Data(Error::Io {
                    path: p.into(),
                    source: e,
                })
            })?
        };
        params = serde_json::from_str(&text)
            .map_err(|e| Failure::Data(Error::Format(format!("--params: {e}"))))?;
    }
    params.validate()?;

    let (control, wav) = read_recording(&args.control)?;
    let (assessed, _) = read_recording(&args.assessed)?;
    // Sample-level WAV input is envelope-reduced; CSV sequences are taken as given.
    let mut pre = config.preprocess.unwrap_or(if wav {
        PreprocessParams::default()
    } else {
        PreprocessParams {
            envelope_window: None,
            ..PreprocessParams::default()
        }
    });
    if args.no_zscore {
        pre.z_normalize = false;
    }
    match args.envelope_window {
        Some(0) => pre.envelope_window = None,
        Some(w) => pre.envelope_window = Some(w),
        None => {}
    }
    if let Some(h) = args.envelope_hop {
        pre.envelope_hop = h;
        if pre.envelope_window.is_none() {
            return Err(Failure::Usage(
                "--envelope-hop needs an envelope window".into(),
            ));
        }
    }
    let row = feature_vector(&pre.apply(&control)?, &pre.apply(&assessed)?, &params)?;

    let mut header = FeatureRow::NAMES.join(",");
    let mut values: Vec<String> = row.features().iter().map(|v| format!("{v:?}")).collect();
    if let Some(label) = args.label {
        header.push_str(",label");
        values.push(label.to_string());
    }
    let mut out = io::stdout().lock();
    if !args.no_header {
        let _ = writeln!(out, "{header}");
    }
    let _ = writeln!(out, "{}", values.join(","));
    Ok(())
}

fn train(args: TrainArgs, config: &Config) -> Outcome {
    let seed = require_seed(args.seed, config)?;
    let d = load_dataset_csv(&args.input)?;
    let pool: Vec<ClassifierSpec> = args.bases.iter().map(|&k| k.into()).collect();
    let mut cfg = BlendConfig::new(&pool, args.meta.into(), seed)?;
    if let Some(v) = args.val_fraction.or(config.train.val_fraction) {
        cfg.val_fraction = v;
    }
    if let Some(m) = args.meta_features.or(config.train.meta_feature_mode) {
        cfg.meta_feature_mode = m;
    }
    let zscore = !args.no_zscore && config.train.zscore.unwrap_or(true);
    let (x, y) = (d.features(), d.labels());
    let e = if zscore {
        fit_ensemble_scaled(&cfg, x.view(), &y)?
    } else {
        fit_ensemble(&cfg, x.view(), &y)?
    };
    e.save(&args.out)?;
    let train_acc = accuracy(&e.predict(x.view())?, &y)?;
    println!(
        "saved {} <- {} (training accuracy {train_acc:.3})",
        args.meta,
        args.bases
            .iter()
            .map(|k| k.as_str())
            .collect::<Vec<_>>()
            .join("+")
    );
    Ok(())
}

fn eval(args: EvalArgs) -> Outcome {
    let text = fs::read_to_string(&args.model).map_err(|e| {
        Failure::Data(Error::Io {
            path: args.model.clone(),
            source: e,
        })
    })?;
    let d = load_dataset_csv(&args.input)?;
    let (x, y) = (d.features(), d.labels());
    let predicted = match BlendEnsemble::from_json(&text) {
        Ok(e) => e.predict(x.view())?,
        Err(ensemble_err) => match Model::from_json(&text) {
            Ok(m) => m.predict(x.view())?,
            Err(_) => return Err(ensemble_err.into()),
        },
    };
    println!("{:.3}", accuracy(&predicted, &y)?);
    Ok(())
}

fn run_sweep(args: SweepArgs, config: &Config) -> Outcome {
    let d = load_dataset_csv(&args.input)?;
    let section = config.sweep.as_ref();
    let defaults = SweepConfig::default();
    let mut split = config.split.unwrap_or(defaults.split);
    if let Some(f) = args.test_fraction {
        split.test_fraction = f;
    }
    let cfg = SweepConfig {
        pool: args
            .pool
            .or_else(|| section.and_then(|s| s.pool.clone()))
            .unwrap_or(defaults.pool),
        subset_sizes: args
            .subset_sizes
            .or_else(|| section.and_then(|s| s.subset_sizes.clone()))
            .unwrap_or(defaults.subset_sizes),
        split,
        smote: config.smote.unwrap_or(defaults.smote),
        fence_k: config.fence_k.unwrap_or(defaults.fence_k),
        val_fraction: section
            .and_then(|s| s.val_fraction)
            .unwrap_or(defaults.val_fraction),
        meta_feature_mode: section
            .and_then(|s| s.meta_feature_mode)
            .unwrap_or(defaults.meta_feature_mode),
        zscore: !args.no_zscore && section.and_then(|s| s.zscore).unwrap_or(defaults.zscore),
        seed: require_seed(args.seed, config)?,
    };
    let report = sweep(&d, &cfg)?;
    report.write(&args.report)?;

    println!(
        "{} configurations written to {}",
        report.rows.len(),
        args.report.display()
    );
    for s in best_of(&report)? {
        let show = |r: &Option<syllablend::harness::ReportRow>| match r {
            Some(r) if r.is_baseline() => format!("{} {:.3}", r.meta, r.accuracy),
            Some(r) => format!("{} <- {} {:.3}", r.meta, r.bases_label(), r.accuracy),
            None => "-".into(),
        };
        println!(
            "{:<18} baseline {:<28} ensemble {:<48} {}",
            s.variant.as_str(),
            show(&s.best_baseline),
            show(&s.best_ensemble),
            s.improvement.map_or("-".into(), |v| format!("{v:+.3}"))
        );
    }
    Ok(())
}
