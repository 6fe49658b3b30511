//! The `mcc` command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcc_core::augment::AugmentConfig;
use mcc_core::baselines::NnModel;
use mcc_core::datasets::{burst_template, gen_blobs, gen_event_sessions, gen_snowman, EventSessionConfig, LabeledSet};
use mcc_core::eval::{default_scale_grid, losocv, roc_sweep, LosoConfig, OperatingPoint, SubjectData, SweepMode};
use mcc_core::mcc::{rank_templates, train, StopMode, TrainConfig, Variant};
use mcc_core::pipeline::{session_distances, train_pipeline, EventEvaluator, PipelineConfig};
use mcc_core::preprocess::FilterSpec;
use mcc_core::{DistanceKind, DistanceSpec, MccModel, Window};
use serde::Serialize;
use serde_json::json;

use crate::bench::{bench_csv, bench_knn, bench_mcc, BenchRow};
use crate::error::{Result, ToolError};
use crate::fingerprint::Preprocessing;
use crate::formats::{
    self, load_ucr, read_model, read_samples, read_session, read_session_set, write_json, write_model,
    write_roc_csv, write_samples, write_session_set, write_spans_csv, write_trace_csv, ClassMapping, ReportFile,
};

#[derive(Debug, Parser)]
#[command(name = "mcc", version, about = "Multi-center classifier: generate data, train, evaluate, benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset.
    #[command(subcommand)]
    Generate(GenerateKind),
    /// Train and rank a model.
    Train(TrainArgs),
    /// Evaluate a model at one operating point, with an ROC sweep.
    Eval(EvalArgs),
    /// Like `eval`, sweeping the template count by default.
    Roc(EvalArgs),
    /// Leave-one-subject-out cross-validation.
    Losocv(LosoArgs),
    /// Time single-window inference.
    Bench(BenchArgs),
    /// Report detected event spans in one session.
    Detect(DetectArgs),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenerateKind {
    /// Two overlapping Gaussians, 1334 points, 2:1 positives.
    Snowman(SnowmanArgs),
    /// Isotropic 2-D Gaussian classes.
    Blobs(BlobsArgs),
    /// Noisy IMU-like sessions with injected events.
    Sessions(SessionsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SnowmanArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BlobsArgs {
    #[arg(long, default_value_t = 200)]
    pub n_pos: usize,
    #[arg(long, default_value_t = 200)]
    pub n_neg: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.0], allow_negative_numbers = true)]
    pub mu_pos: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [4.0, 0.0], allow_negative_numbers = true)]
    pub mu_neg: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_pos: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_neg: f64,
    /// Generate this many independent subjects, tagged in shape.json.
    #[arg(long)]
    pub subjects: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SessionsArgs {
    #[arg(long, default_value_t = 4)]
    pub event_sessions: usize,
    #[arg(long, default_value_t = 4)]
    pub background_sessions: usize,
    #[arg(long, default_value_t = 10)]
    pub events_per_session: usize,
    #[arg(long, default_value_t = 2.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 50.0)]
    pub sample_rate: f64,
    #[arg(long, default_value_t = 60.0)]
    pub duration: f64,
    #[arg(long, default_value = "cough")]
    pub event_label: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

/// Where windows or sessions come from.
#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Directory holding samples.csv and shape.json.
    #[arg(long, conflicts_with_all = ["ucr_train", "sessions"])]
    pub data: Option<PathBuf>,
    /// UCR-format training file (class label first, tab or comma separated).
    #[arg(long, conflicts_with = "sessions", requires_all = ["pos_classes", "neg_classes"])]
    pub ucr_train: Option<PathBuf>,
    #[arg(long, requires = "ucr_train")]
    pub ucr_test: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub pos_classes: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub neg_classes: Vec<String>,
    /// Directory holding sessions.json.
    #[arg(long)]
    pub sessions: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    Improved,
    Original,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceArg {
    Euclid,
    Dtw,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainingArgs {
    #[arg(long, value_enum, default_value_t = VariantArg::Improved)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = DistanceArg::Euclid)]
    pub distance: DistanceArg,
    /// Sakoe-Chiba half-width in frames (DTW only).
    #[arg(long)]
    pub band: Option<usize>,
    /// Stop once the total discrepancy cost is at most H.
    #[arg(long, value_name = "H", conflicts_with = "stop_precision")]
    pub stop_cost: Option<f64>,
    /// Stop once training precision reaches P (default 0.8).
    #[arg(long, value_name = "P")]
    pub stop_precision: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub max_clusters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TrainingArgs {
    pub fn distance_spec(&self) -> Result<DistanceSpec> {
        match (self.distance, self.band) {
            (DistanceArg::Euclid, Some(_)) => Err(ToolError::Config("--band applies to --distance dtw only".into())),
            (DistanceArg::Euclid, None) => Ok(DistanceSpec::EUCLIDEAN),
            (DistanceArg::Dtw, band) => Ok(DistanceSpec { kind: DistanceKind::DtwDependent, band_radius: band }),
        }
    }

    pub fn config(&self) -> Result<TrainConfig> {
        let stop = match (self.stop_cost, self.stop_precision) {
            (Some(h), _) => StopMode::CostThreshold(h),
            (None, Some(p)) => StopMode::PrecisionTarget(p),
            (None, None) => StopMode::PrecisionTarget(0.8),
        };
        let cfg = TrainConfig {
            stop,
            max_clusters: self.max_clusters,
            variant: self.variant(),
            distance: self.distance_spec()?,
            rng_seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn variant(&self) -> Variant {
        match self.variant {
            VariantArg::Improved => Variant::Improved,
            VariantArg::Original => Variant::Original,
        }
    }
}

/// Session preprocessing, augmentation and windowing.
#[derive(Debug, Clone, Args, Serialize)]
pub struct PipelineArgs {
    #[arg(long, value_delimiter = ',', default_values_t = ["x".to_string(), "y".to_string()])]
    pub channels: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub ma_window: usize,
    #[arg(long, default_value_t = 1.5)]
    pub hp_cutoff: f64,
    #[arg(long, default_value_t = 2)]
    pub hp_order: usize,
    #[arg(long, default_value_t = 0.4)]
    pub window_s: f64,
    #[arg(long, default_value_t = 0.1)]
    pub train_stride_s: f64,
    #[arg(long, default_value_t = 0.02)]
    pub infer_stride_s: f64,
    #[arg(long, default_value_t = 4)]
    pub negative_ratio: usize,
    #[arg(long, default_value = "cough")]
    pub event_label: String,
    #[arg(long, default_value_t = 0.03)]
    pub jitter_sigma: f64,
    #[arg(long, default_value_t = 0.1)]
    pub scale_sigma: f64,
    #[arg(long, default_value_t = 4)]
    pub warp_knots: usize,
    #[arg(long, default_value_t = 0.2)]
    pub warp_sigma: f64,
}

impl PipelineArgs {
    pub fn config(&self, train: TrainConfig, seed: u64) -> Result<PipelineConfig> {
        let augment = AugmentConfig {
            jitter_sigma: self.jitter_sigma,
            scale_sigma: self.scale_sigma,
            warp_knots: self.warp_knots,
            warp_sigma: self.warp_sigma,
            rng_seed: seed,
        };
        augment.validate()?;
        if self.negative_ratio == 0 {
            return Err(ToolError::Config("--negative-ratio must be >= 1".into()));
        }
        Ok(PipelineConfig {
            channels: self.channels.clone(),
            filter: FilterSpec {
                moving_average_window: self.ma_window,
                highpass_cutoff_hz: self.hp_cutoff,
                highpass_order: self.hp_order,
            },
            window_s: self.window_s,
            train_stride_s: self.train_stride_s,
            infer_stride_s: self.infer_stride_s,
            negative_ratio: self.negative_ratio,
            event_label: self.event_label.clone(),
            augment,
            train,
            seed,
        })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Exit with code 4 when the stop criterion was not reached.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    Train,
    Test,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepArg {
    /// Threshold scales (50 log-spaced values in [0.25, 4] unless `--scales`).
    Scale,
    /// Template counts 1..=`--max-templates`.
    Templates,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OperatingArgs {
    /// Templates used; defaults to all.
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub threshold_scale: f64,
}

impl OperatingArgs {
    pub fn point(&self, model: &MccModel) -> OperatingPoint {
        OperatingPoint {
            top_k: self.top_k.unwrap_or(model.len()),
            threshold_scale: self.threshold_scale,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub sweep: Option<SweepArg>,
    #[arg(long, default_value_t = 30)]
    pub max_templates: usize,
    #[arg(long, value_delimiter = ',')]
    pub scales: Vec<f64>,
}

impl SweepArgs {
    fn mode(&self, default: SweepArg) -> SweepMode {
        match self.sweep.unwrap_or(default) {
            SweepArg::Templates => SweepMode::TemplateCount(self.max_templates),
            SweepArg::Scale if self.scales.is_empty() => SweepMode::ThresholdScale(default_scale_grid()),
            SweepArg::Scale => SweepMode::ThresholdScale(self.scales.clone()),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Windows evaluated; defaults to the test split when there is one.
    #[arg(long, value_enum)]
    pub subset: Option<Subset>,
    #[command(flatten)]
    pub op: OperatingArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct LosoArgs {
    /// Directory holding samples.csv and a shape.json with subjects.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub op: OperatingArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub subset: Option<Subset>,
    #[command(flatten)]
    pub op: OperatingArgs,
    #[arg(long, default_value_t = 20)]
    pub repetitions: usize,
    /// Also time a 1-nearest-neighbour baseline over the training split,
    /// under the model's distance.
    #[arg(long)]
    pub knn: bool,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DetectArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Session CSV (`t,<ch>,...`).
    #[arg(long)]
    pub session: PathBuf,
    #[command(flatten)]
    pub op: OperatingArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(ToolError::Config(e.to_string().trim_end().to_string())),
    };
    match cli.command {
        Command::Generate(kind) => generate(&kind),
        Command::Train(args) => cmd_train(&args),
        Command::Eval(args) => cmd_eval(&args, "eval", SweepArg::Scale),
        Command::Roc(args) => cmd_eval(&args, "roc", SweepArg::Templates),
        Command::Losocv(args) => cmd_losocv(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Detect(args) => cmd_detect(&args),
    }
}

fn echo_config<T: Serialize>(out: &Path, command: &str, args: &T) -> Result<()> {
    write_json(&out.join("config.json"), &json!({ "command": command, "args": args }))
}

// ------------------------------------------------------------- generate ---

/// Event and distractor shapes for generated sessions, sized to `fs`.
pub fn session_templates(fs: f64) -> Result<(Window, Window)> {
    let len = (0.4 * fs).round().max(2.0) as usize;
    Ok((
        burst_template(len, 1.0, &[2.0, -1.5, 0.5])?,
        burst_template(len, 1.5, &[1.5, 1.5, 0.5])?,
    ))
}

fn generate(kind: &GenerateKind) -> Result<()> {
    match kind {
        GenerateKind::Snowman(a) => {
            write_samples(&a.out, &gen_snowman(a.seed), None)?;
            echo_config(&a.out, "generate", kind)
        }
        GenerateKind::Blobs(a) => {
            if a.mu_pos.len() != 2 || a.mu_neg.len() != 2 {
                return Err(ToolError::Config("--mu-pos and --mu-neg take two values, `x,y`".into()));
            }
            let blobs = |seed| {
                gen_blobs(
                    a.n_pos,
                    a.n_neg,
                    [a.mu_pos[0], a.mu_pos[1]],
                    [a.mu_neg[0], a.mu_neg[1]],
                    a.sigma_pos,
                    a.sigma_neg,
                    seed,
                )
            };
            match a.subjects {
                None => write_samples(&a.out, &blobs(a.seed)?, None)?,
                Some(0) => return Err(ToolError::Config("--subjects must be >= 1".into())),
                Some(n) => {
                    let mut samples = Vec::new();
                    let mut labels = Vec::new();
                    let mut subjects = Vec::new();
                    for s in 0..n {
                        let set = blobs(a.seed.wrapping_add(s as u64))?;
                        subjects.extend(std::iter::repeat_n(format!("s{s:02}"), set.len()));
                        samples.extend(set.samples);
                        labels.extend(set.labels);
                    }
                    let set = LabeledSet::new("blobs", samples, labels)?;
                    write_samples(&a.out, &set, Some(&subjects))?;
                }
            }
            echo_config(&a.out, "generate", kind)
        }
        GenerateKind::Sessions(a) => {
            let (event, distractor) = session_templates(a.sample_rate)?;
            let cfg = |n, label: &str, seed| EventSessionConfig {
                n_sessions: n,
                events_per_session: a.events_per_session,
                noise_sigma: a.noise_sigma,
                sample_rate_hz: a.sample_rate,
                duration_s: a.duration,
                label: label.into(),
                seed,
            };
            let events = gen_event_sessions(&event, &cfg(a.event_sessions, &a.event_label, a.seed))?;
            let background = gen_event_sessions(&distractor, &cfg(a.background_sessions, "other", a.seed.wrapping_add(1)))?;
            write_session_set(&a.out, &events, &background)?;
            echo_config(&a.out, "generate", kind)
        }
    }
}

// ----------------------------------------------------------------- data ---

pub enum Dataset {
    Windows(LabeledSet),
    Sessions { events: Vec<mcc_core::preprocess::SensorSession>, background: Vec<mcc_core::preprocess::SensorSession> },
}

pub fn load_data(args: &DataArgs) -> Result<Dataset> {
    if let Some(dir) = &args.data {
        return Ok(Dataset::Windows(read_samples(dir)?.0));
    }
    if let Some(train) = &args.ucr_train {
        let mapping = ClassMapping { positive: args.pos_classes.clone(), negative: args.neg_classes.clone() };
        let name = train.file_stem().and_then(|s| s.to_str()).unwrap_or("ucr");
        return Ok(Dataset::Windows(load_ucr(train, args.ucr_test.as_deref(), &mapping, name)?));
    }
    if let Some(dir) = &args.sessions {
        let (events, background) = read_session_set(dir)?;
        return Ok(Dataset::Sessions { events, background });
    }
    Err(ToolError::Config("one of --data, --ucr-train or --sessions is required".into()))
}

fn subset_indices(set: &LabeledSet, subset: Subset) -> Vec<usize> {
    match subset {
        Subset::Train => set.train_indices(),
        Subset::Test => set.test_indices(),
        Subset::All => (0..set.len()).collect(),
    }
}

fn default_subset(set: &LabeledSet, requested: Option<Subset>) -> Subset {
    requested.unwrap_or(if set.split.is_some() { Subset::Test } else { Subset::All })
}

// ---------------------------------------------------------------- train ---

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let train_cfg = args.training.config()?;
    let variant = args.training.variant();
    let (model, trace, positives) = match load_data(&args.data)? {
        Dataset::Windows(set) => {
            let (pos, neg) = set.partition(&set.train_indices());
            let (model, trace) = train(&pos, &neg, &train_cfg)?;
            let mut model = rank_templates(&model, &pos)?;
            model.preprocessing_fingerprint = Preprocessing::Windows.fingerprint(variant);
            (model, trace, pos.len())
        }
        Dataset::Sessions { events, background } => {
            let cfg = args.pipeline.config(train_cfg, args.training.seed)?;
            let (mut model, trace) = train_pipeline(&events, &background, &cfg)?;
            model.preprocessing_fingerprint = Preprocessing::from_pipeline(&cfg).fingerprint(variant);
            (model, trace, events.len())
        }
    };
    model.validate()?;
    let bytes = write_model(&args.out.join("model.json"), &model)?;
    write_trace_csv(&args.out.join("trace.csv"), &trace)?;
    echo_config(&args.out, "train", args)?;
    let last = trace.steps.last();
    eprintln!(
        "trained {} templates from {positives} positive inputs ({bytes} bytes); final precision {:.4}",
        model.len(),
        last.map_or(0.0, |s| s.precision)
    );
    if let Some(w) = trace.warning() {
        eprintln!("warning: {w}");
        if args.strict {
            return Err(ToolError::CriterionNotMet(w.into()));
        }
    }
    Ok(())
}

// ----------------------------------------------------------------- eval ---

/// Evaluates `model` on a window set; `None` when the subset lacks a class.
pub fn eval_windows(
    model: &MccModel,
    set: &LabeledSet,
    subset: Subset,
    op: OperatingPoint,
    mode: &SweepMode,
) -> Result<ReportFile> {
    Preprocessing::Windows.check(&model.preprocessing_fingerprint)?;
    let (pos, neg) = set.partition(&subset_indices(set, subset));
    if pos.is_empty() || neg.is_empty() {
        return Err(ToolError::Data("evaluation subset needs both positive and negative windows".into()));
    }
    let report = roc_sweep(model, &pos, &neg, mode, op)?;
    Ok(ReportFile::new(&report, model.len()).with_counts(pos.len(), neg.len()))
}

fn cmd_eval(args: &EvalArgs, command: &str, default_sweep: SweepArg) -> Result<()> {
    let model = read_model(&args.model)?;
    let op = args.op.point(&model);
    let mode = args.sweep.mode(default_sweep);
    let report = match load_data(&args.data)? {
        Dataset::Windows(set) => {
            let subset = default_subset(&set, args.subset);
            eval_windows(&model, &set, subset, op, &mode)?
        }
        Dataset::Sessions { events, background } => {
            let cfg = args.pipeline.config(TrainConfig::default(), 0)?;
            Preprocessing::from_pipeline(&cfg).check(&model.preprocessing_fingerprint)?;
            let evaluator = EventEvaluator::new(&model, &events, &background, &cfg)?;
            ReportFile::new(&evaluator.report(&mode, op)?, model.len())
        }
    };
    write_json(&args.out.join("report.json"), &report)?;
    let points: Vec<_> = report
        .roc_points
        .iter()
        .map(|p| mcc_core::eval::RocPoint { param: p.param, fpr: p.fpr, tpr: p.tpr })
        .collect();
    write_roc_csv(&args.out.join("roc.csv"), &points)?;
    echo_config(&args.out, command, args)?;
    eprintln!(
        "sensitivity {:.4} specificity {:.4} auc {:.4}",
        report.sensitivity, report.specificity, report.auc
    );
    Ok(())
}

// --------------------------------------------------------------- losocv ---

#[derive(Debug, Serialize)]
struct FoldFile {
    held_out: String,
    template_sources: Vec<String>,
    report: ReportFile,
}

fn cmd_losocv(args: &LosoArgs) -> Result<()> {
    let (set, shape) = read_samples(&args.data)?;
    let subjects = shape
        .subjects
        .ok_or_else(|| ToolError::Data("shape.json lists no subjects".into()))?;
    let mut by_subject: BTreeMap<String, SubjectData> = BTreeMap::new();
    for ((w, &label), s) in set.samples.iter().zip(&set.labels).zip(&subjects) {
        let entry = by_subject
            .entry(s.clone())
            .or_insert_with(|| SubjectData { positives: Vec::new(), negatives: Vec::new() });
        if label { &mut entry.positives } else { &mut entry.negatives }.push(w.clone());
    }
    let cfg = LosoConfig {
        train: args.training.config()?,
        top_k: args.op.top_k,
        threshold_scale: args.op.threshold_scale,
        sweep: args.sweep.mode(SweepArg::Scale),
    };
    let result = losocv(&by_subject, &cfg)?;
    let fingerprint = Preprocessing::Windows.fingerprint(args.training.variant());
    let mut folds = Vec::new();
    for fold in &result.folds {
        let mut model = fold.model.clone();
        model.preprocessing_fingerprint = fingerprint.clone();
        write_model(&args.out.join("models").join(format!("{}.json", fold.held_out)), &model)?;
        folds.push(FoldFile {
            held_out: fold.held_out.clone(),
            template_sources: fold.template_sources.clone(),
            report: ReportFile::new(&fold.report, model.len()),
        });
    }
    let aggregate = ReportFile::new(&result.aggregate, 0);
    write_json(
        &args.out.join("report.json"),
        &json!({ "aggregate": aggregate, "mean_fold_auc": result.mean_fold_auc, "folds": folds }),
    )?;
    write_roc_csv(&args.out.join("roc.csv"), &result.aggregate.roc_points)?;
    echo_config(&args.out, "losocv", args)?;
    eprintln!(
        "{} folds: sensitivity {:.4} specificity {:.4} auc {:.4} (mean fold auc {:.4})",
        result.folds.len(),
        aggregate.sensitivity,
        aggregate.specificity,
        aggregate.auc,
        result.mean_fold_auc
    );
    Ok(())
}

// ---------------------------------------------------------------- bench ---

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let model_bytes = std::fs::metadata(&args.model).map_err(|e| ToolError::io(&args.model, e))?.len();
    let op = args.op.point(&model);
    let Dataset::Windows(set) = load_data(&args.data)? else {
        return Err(ToolError::Config("bench needs a window set (--data or --ucr-train)".into()));
    };
    let indices = subset_indices(&set, default_subset(&set, args.subset));
    let windows: Vec<Window> = indices.iter().map(|&i| set.samples[i].clone()).collect();
    let mut rows = vec![BenchRow {
        method: "mcc".into(),
        timing_ns_per_inference: bench_mcc(&model, &windows, op.top_k, op.threshold_scale, args.repetitions)?,
        model_bytes,
        repetitions: args.repetitions,
        windows: windows.len(),
    }];
    if args.knn {
        let train_idx = set.train_indices();
        let samples: Vec<Window> = train_idx.iter().map(|&i| set.samples[i].clone()).collect();
        let labels: Vec<bool> = train_idx.iter().map(|&i| set.labels[i]).collect();
        // Stored training values plus one label byte per sample.
        let bytes = samples.iter().map(|w| 8 * w.values().len() as u64 + 1).sum();
        let knn = NnModel::new(samples, labels, 1, model.distance)?;
        rows.push(BenchRow {
            method: "1nn".into(),
            timing_ns_per_inference: bench_knn(&knn, &windows, args.repetitions)?,
            model_bytes: bytes,
            repetitions: args.repetitions,
            windows: windows.len(),
        });
    }
    formats::write_bytes(&args.out.join("bench.csv"), &bench_csv(&rows)?)?;
    echo_config(&args.out, "bench", args)?;
    for r in &rows {
        eprintln!("{}: {:.0} ns/window, {} bytes", r.method, r.timing_ns_per_inference, r.model_bytes);
    }
    Ok(())
}

// --------------------------------------------------------------- detect ---

fn cmd_detect(args: &DetectArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let cfg = args.pipeline.config(TrainConfig::default(), 0)?;
    Preprocessing::from_pipeline(&cfg).check(&model.preprocessing_fingerprint)?;
    let op = args.op.point(&model);
    model.check_operating_point(op.top_k, op.threshold_scale)?;
    let session = read_session(&args.session, None)?;
    let spans = session_distances(&model, &session, &cfg)?.detections(&model, op);
    write_spans_csv(&args.out.join("detections.csv"), &spans)?;
    echo_config(&args.out, "detect", args)?;
    eprintln!("{} detected spans", spans.len());
    Ok(())
}
