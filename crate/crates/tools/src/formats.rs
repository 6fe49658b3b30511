//! On-disk formats: model JSON, flat sample CSV with a shape sidecar, session
//! and annotation CSVs, UCR text files, and report/ROC/trace outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mcc_core::datasets::{LabeledSet, Split};
use mcc_core::eval::{EvalReport, OperatingPoint, RocPoint, SessionMetrics};
use mcc_core::mcc::TrainTrace;
use mcc_core::preprocess::{EventSpan, SensorSession};
use mcc_core::{DistanceKind, DistanceSpec, MccModel, Template, Window};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ToolError};

pub const MODEL_FORMAT_VERSION: u32 = 1;

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| ToolError::io(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| ToolError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| ToolError::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| ToolError::io(path, e))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| ToolError::io(path, e))
}

// ---------------------------------------------------------------- model ---

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DistanceFile {
    kind: String,
    band: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TemplateFile {
    center: Vec<Vec<f64>>,
    radius: f64,
    rank: Option<usize>,
    coverage_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    distance: DistanceFile,
    window_shape: (usize, usize),
    preprocessing_fingerprint: String,
    templates: Vec<TemplateFile>,
}

pub fn distance_name(kind: DistanceKind) -> &'static str {
    match kind {
        DistanceKind::EuclideanFlat => "euclid",
        DistanceKind::DtwDependent => "dtw",
    }
}

/// Pretty-printed model JSON. Floats use the shortest representation that
/// parses back to the same bits.
pub fn model_to_json(model: &MccModel) -> String {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        distance: DistanceFile {
            kind: distance_name(model.distance.kind).into(),
            band: model.distance.band_radius,
        },
        window_shape: model.window_shape,
        preprocessing_fingerprint: model.preprocessing_fingerprint.clone(),
        templates: model
            .templates
            .iter()
            .map(|t| TemplateFile {
                center: t.center.frames().map(<[f64]>::to_vec).collect(),
                radius: t.radius,
                rank: t.rank,
                coverage_count: t.coverage_count,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model is serializable");
    text.push('\n');
    text
}

pub fn model_from_json(text: &str) -> Result<MccModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| ToolError::Data(format!("model: {e}")))?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(ToolError::Data(format!("unsupported model format_version {}", file.format_version)));
    }
    let kind = match file.distance.kind.as_str() {
        "euclid" => DistanceKind::EuclideanFlat,
        "dtw" => DistanceKind::DtwDependent,
        other => return Err(ToolError::Data(format!("unknown distance kind `{other}`"))),
    };
    let templates = file
        .templates
        .into_iter()
        .map(|t| {
            Ok(Template {
                center: Window::from_frames(&t.center)?,
                radius: t.radius,
                rank: t.rank,
                coverage_count: t.coverage_count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let model = MccModel {
        templates,
        distance: DistanceSpec { kind, band_radius: file.distance.band },
        window_shape: file.window_shape,
        preprocessing_fingerprint: file.preprocessing_fingerprint,
    };
    model.validate().map_err(|e| ToolError::Data(format!("model: {e}")))?;
    Ok(model)
}

/// Writes the model and returns its size in bytes.
pub fn write_model(path: &Path, model: &MccModel) -> Result<u64> {
    let text = model_to_json(model);
    write_bytes(path, text.as_bytes())?;
    Ok(text.len() as u64)
}

pub fn read_model(path: &Path) -> Result<MccModel> {
    model_from_json(&read_text(path)?).map_err(|e| match e {
        ToolError::Data(m) => ToolError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

// -------------------------------------------------------------- samples ---

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitFile {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Sidecar of `samples.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeFile {
    pub name: String,
    pub n_samples: usize,
    pub len: usize,
    pub channels: usize,
    /// Column order of the values in each row.
    pub layout: String,
    pub split: Option<SplitFile>,
    /// Subject of each row, for leave-one-subject-out runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subjects: Option<Vec<String>>,
}

const CHANNEL_MAJOR: &str = "channel-major";

/// Writes `samples.csv` (`label,ch0_t0,ch0_t1,...`) and `shape.json` into `dir`.
pub fn write_samples(dir: &Path, set: &LabeledSet, subjects: Option<&[String]>) -> Result<()> {
    let first = set
        .samples
        .first()
        .ok_or_else(|| ToolError::Data("cannot write an empty sample set".into()))?;
    let (len, channels) = first.shape();
    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["label".to_string()];
    for c in 0..channels {
        header.extend((0..len).map(|t| format!("ch{c}_t{t}")));
    }
    let csv_err = |e: csv::Error| ToolError::Data(e.to_string());
    out.write_record(&header).map_err(csv_err)?;
    for (w, &label) in set.samples.iter().zip(&set.labels) {
        if w.shape() != (len, channels) {
            return Err(ToolError::Data("samples.csv needs equal window shapes".into()));
        }
        let mut row = vec![if label { "1" } else { "0" }.to_string()];
        for c in 0..channels {
            row.extend(w.channel(c).map(|v| v.to_string()));
        }
        out.write_record(&row).map_err(csv_err)?;
    }
    let bytes = out.into_inner().map_err(|e| ToolError::Data(e.to_string()))?;
    write_bytes(&dir.join("samples.csv"), &bytes)?;
    let shape = ShapeFile {
        name: set.name.clone(),
        n_samples: set.len(),
        len,
        channels,
        layout: CHANNEL_MAJOR.into(),
        split: set.split.as_ref().map(|s| SplitFile { train: s.train.clone(), test: s.test.clone() }),
        subjects: subjects.map(<[String]>::to_vec),
    };
    write_json(&dir.join("shape.json"), &shape)
}

fn parse_f64(field: &str, what: impl Fn() -> String) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| ToolError::Data(format!("{}: `{field}` is not a number", what())))
}

pub fn read_samples(dir: &Path) -> Result<(LabeledSet, ShapeFile)> {
    let shape: ShapeFile = read_json(&dir.join("shape.json"))?;
    if shape.layout != CHANNEL_MAJOR {
        return Err(ToolError::Data(format!("unsupported sample layout `{}`", shape.layout)));
    }
    let path = dir.join("samples.csv");
    let mut reader = csv::Reader::from_path(&path).map_err(|e| ToolError::io(&path, e))?;
    let width = 1 + shape.len * shape.channels;
    let mut samples = Vec::with_capacity(shape.n_samples);
    let mut labels = Vec::with_capacity(shape.n_samples);
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ToolError::io(&path, e))?;
        let row = i + 2;
        if record.len() != width {
            return Err(ToolError::Data(format!("{}:{row}: expected {width} fields, got {}", path.display(), record.len())));
        }
        labels.push(match record[0].trim() {
            "1" => true,
            "0" => false,
            other => return Err(ToolError::Data(format!("{}:{row}: label `{other}` is not 0 or 1", path.display()))),
        });
        let mut values = vec![0.0; shape.len * shape.channels];
        for c in 0..shape.channels {
            for t in 0..shape.len {
                let field = &record[1 + c * shape.len + t];
                values[t * shape.channels + c] = parse_f64(field, || format!("{}:{row}", path.display()))?;
            }
        }
        samples.push(Window::from_row_major(values, shape.len, shape.channels)?);
    }
    if samples.len() != shape.n_samples {
        return Err(ToolError::Data(format!(
            "shape.json declares {} samples but samples.csv has {}",
            shape.n_samples,
            samples.len()
        )));
    }
    if let Some(s) = &shape.subjects {
        if s.len() != samples.len() {
            return Err(ToolError::Data("subjects list length differs from sample count".into()));
        }
    }
    let mut set = LabeledSet::new(shape.name.clone(), samples, labels)?;
    if let Some(split) = &shape.split {
        set = set
            .with_split(Split { train: split.train.clone(), test: split.test.clone() })
            .map_err(|e| ToolError::Data(format!("shape.json split: {e}")))?;
    }
    Ok((set, shape))
}

// ------------------------------------------------------------------ UCR ---

/// Class labels assigned to each side of the binary problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMapping {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

impl ClassMapping {
    fn key(label: &str) -> String {
        // "1", "1.0" and " 1" name the same class.
        match label.trim().parse::<f64>() {
            Ok(v) => v.to_string(),
            Err(_) => label.trim().to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.positive.is_empty() || self.negative.is_empty() {
            return Err(ToolError::Config("class mapping needs positive and negative classes".into()));
        }
        for p in &self.positive {
            if self.negative.iter().any(|n| Self::key(n) == Self::key(p)) {
                return Err(ToolError::Config(format!("class `{p}` is both positive and negative")));
            }
        }
        Ok(())
    }

    fn label_of(&self, class: &str) -> Option<bool> {
        let k = Self::key(class);
        if self.positive.iter().any(|p| Self::key(p) == k) {
            Some(true)
        } else if self.negative.iter().any(|n| Self::key(n) == k) {
            Some(false)
        } else {
            None
        }
    }
}

/// Univariate UCR rows (`class,v0,v1,...`, tab- or comma-separated) with the
/// class mapping applied. Unmapped rows are dropped; order is preserved.
pub fn parse_ucr(text: &str, mapping: &ClassMapping, origin: &str) -> Result<(Vec<Window>, Vec<bool>)> {
    mapping.validate()?;
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    let mut len = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(['\t', ',']).map(str::trim);
        let class = fields.next().unwrap_or_default();
        let values = fields
            .map(|f| parse_f64(f, || format!("{origin}:{}", i + 1)))
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(ToolError::Data(format!("{origin}:{}: row has no values", i + 1)));
        }
        match len {
            None => len = Some(values.len()),
            Some(l) if l != values.len() => {
                return Err(ToolError::Data(format!(
                    "{origin}:{}: series length {} differs from {l}",
                    i + 1,
                    values.len()
                )))
            }
            _ => {}
        }
        if let Some(label) = mapping.label_of(class) {
            samples.push(Window::from_series(&values)?);
            labels.push(label);
        }
    }
    Ok((samples, labels))
}

/// Loads a UCR train/test pair into one set whose split is the file split.
pub fn load_ucr(train: &Path, test: Option<&Path>, mapping: &ClassMapping, name: &str) -> Result<LabeledSet> {
    let (mut samples, mut labels) = parse_ucr(&read_text(train)?, mapping, &train.display().to_string())?;
    let n_train = samples.len();
    if let Some(test) = test {
        let (s, l) = parse_ucr(&read_text(test)?, mapping, &test.display().to_string())?;
        samples.extend(s);
        labels.extend(l);
    }
    if samples.is_empty() {
        return Err(ToolError::Data("no rows match the class mapping".into()));
    }
    if samples.iter().any(|w| w.len() != samples[0].len()) {
        return Err(ToolError::Data("train and test series lengths differ".into()));
    }
    let set = LabeledSet::new(name, samples, labels)?;
    if test.is_some() {
        let n = set.len();
        Ok(set.with_split(Split { train: (0..n_train).collect(), test: (n_train..n).collect() })?)
    } else {
        Ok(set)
    }
}

// ------------------------------------------------------------- sessions ---

/// Median of the time steps; every step must be within 1% of it.
pub fn infer_sample_rate(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(ToolError::Data("a session needs at least two samples".into()));
    }
    let mut steps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    if steps.iter().any(|d| d.is_nan() || *d <= 0.0) {
        return Err(ToolError::Data("timestamps must be strictly increasing".into()));
    }
    let mut sorted = steps.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    steps.retain(|d| ((d - median) / median).abs() > 0.01);
    if let Some(bad) = steps.first() {
        return Err(ToolError::Data(format!(
            "non-uniform sampling: step {bad} s deviates from median {median} s by more than 1%"
        )));
    }
    Ok(1.0 / median)
}

/// Session CSV with header `t,<ch1>,<ch2>,...`.
pub fn write_session(path: &Path, session: &SensorSession) -> Result<()> {
    let mut out = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| ToolError::Data(e.to_string());
    let mut header = vec!["t".to_string()];
    header.extend(session.channel_names.iter().cloned());
    out.write_record(&header).map_err(csv_err)?;
    for (t, frame) in session.data.frames().enumerate() {
        let mut row = vec![(t as f64 / session.sample_rate_hz).to_string()];
        row.extend(frame.iter().map(|v| v.to_string()));
        out.write_record(&row).map_err(csv_err)?;
    }
    write_bytes(path, &out.into_inner().map_err(|e| ToolError::Data(e.to_string()))?)
}

pub fn write_annotations(path: &Path, spans: &[EventSpan]) -> Result<()> {
    let mut out = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| ToolError::Data(e.to_string());
    out.write_record(["start_s", "end_s", "label"]).map_err(csv_err)?;
    for s in spans {
        out.write_record([s.start_s.to_string(), s.end_s.to_string(), s.label.clone()])
            .map_err(csv_err)?;
    }
    write_bytes(path, &out.into_inner().map_err(|e| ToolError::Data(e.to_string()))?)
}

pub fn read_annotations(path: &Path) -> Result<Vec<EventSpan>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| ToolError::io(path, e))?;
    let headers = reader.headers().map_err(|e| ToolError::io(path, e))?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["start_s", "end_s", "label"] {
        return Err(ToolError::Data(format!("{}: header must be start_s,end_s,label", path.display())));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, r)| {
            let r = r.map_err(|e| ToolError::io(path, e))?;
            let at = || format!("{}:{}", path.display(), i + 2);
            if r.len() != 3 {
                return Err(ToolError::Data(format!("{}: expected 3 fields", at())));
            }
            EventSpan::new(parse_f64(&r[0], at)?, parse_f64(&r[1], at)?, r[2].trim())
                .map_err(|e| ToolError::Data(format!("{}: {e}", at())))
        })
        .collect()
}

pub fn read_session(path: &Path, annotations: Option<&Path>) -> Result<SensorSession> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| ToolError::io(path, e))?;
    let headers = reader.headers().map_err(|e| ToolError::io(path, e))?.clone();
    if headers.len() < 2 || headers[0].trim() != "t" {
        return Err(ToolError::Data(format!("{}: header must be t,<channel>,...", path.display())));
    }
    let names: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, r) in reader.records().enumerate() {
        let r = r.map_err(|e| ToolError::io(path, e))?;
        let at = || format!("{}:{}", path.display(), i + 2);
        if r.len() != headers.len() {
            return Err(ToolError::Data(format!("{}: expected {} fields", at(), headers.len())));
        }
        times.push(parse_f64(&r[0], at)?);
        for f in r.iter().skip(1) {
            values.push(parse_f64(f, at)?);
        }
    }
    let fs = infer_sample_rate(&times)?;
    let data = Window::from_row_major(values, times.len(), names.len())?;
    let spans = match annotations {
        Some(a) => read_annotations(a)?,
        None => Vec::new(),
    };
    SensorSession::new(data, fs, names, spans).map_err(|e| ToolError::Data(format!("{}: {e}", path.display())))
}

/// `sessions.json`: event sessions (with annotations) and event-free sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub event_sessions: Vec<SessionEntry>,
    pub background_sessions: Vec<SessionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEntry {
    pub data: String,
    pub annotations: Option<String>,
}

pub fn write_session_set(dir: &Path, events: &[SensorSession], background: &[SensorSession]) -> Result<()> {
    let mut manifest = SessionManifest { event_sessions: Vec::new(), background_sessions: Vec::new() };
    for (prefix, sessions, list) in [
        ("event", events, &mut manifest.event_sessions),
        ("background", background, &mut manifest.background_sessions),
    ] {
        for (i, s) in sessions.iter().enumerate() {
            let data = format!("{prefix}-{i:03}.csv");
            let ann = format!("{prefix}-{i:03}.annotations.csv");
            write_session(&dir.join(&data), s)?;
            write_annotations(&dir.join(&ann), &s.annotations)?;
            list.push(SessionEntry { data, annotations: Some(ann) });
        }
    }
    write_json(&dir.join("sessions.json"), &manifest)
}

/// `(event sessions, background sessions)` listed in `dir/sessions.json`.
pub fn read_session_set(dir: &Path) -> Result<(Vec<SensorSession>, Vec<SensorSession>)> {
    let manifest: SessionManifest = read_json(&dir.join("sessions.json"))?;
    let load = |entries: &[SessionEntry]| -> Result<Vec<SensorSession>> {
        entries
            .iter()
            .map(|e| {
                let ann: Option<PathBuf> = e.annotations.as_ref().map(|a| dir.join(a));
                read_session(&dir.join(&e.data), ann.as_deref())
            })
            .collect()
    };
    Ok((load(&manifest.event_sessions)?, load(&manifest.background_sessions)?))
}

// -------------------------------------------------------------- reports ---

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocPointFile {
    pub param: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPointFile {
    pub top_k: usize,
    pub threshold_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMetricsFile {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub auc: Option<f64>,
}

/// Evaluation report as written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub sensitivity: f64,
    pub specificity: f64,
    /// Window accuracy, when the evaluation set is labeled windows.
    pub accuracy: Option<f64>,
    pub auc: f64,
    pub roc_points: Vec<RocPointFile>,
    pub operating_point: OperatingPointFile,
    pub per_session: BTreeMap<String, SessionMetricsFile>,
    pub timing_ns_per_inference: Option<f64>,
    pub model_bytes: Option<u64>,
    pub n_positive: Option<usize>,
    pub n_negative: Option<usize>,
    pub n_templates: usize,
}

impl ReportFile {
    pub fn new(report: &EvalReport, n_templates: usize) -> Self {
        let metrics = |m: &SessionMetrics| SessionMetricsFile {
            sensitivity: m.sensitivity,
            specificity: m.specificity,
            auc: m.auc,
        };
        let OperatingPoint { top_k, threshold_scale } = report.operating_point;
        Self {
            sensitivity: report.sensitivity,
            specificity: report.specificity,
            accuracy: None,
            auc: report.auc,
            roc_points: report
                .roc_points
                .iter()
                .map(|p| RocPointFile { param: p.param, fpr: p.fpr, tpr: p.tpr })
                .collect(),
            operating_point: OperatingPointFile { top_k, threshold_scale },
            per_session: report.per_session.iter().map(|(k, v)| (k.clone(), metrics(v))).collect(),
            timing_ns_per_inference: report.timing_ns_per_inference,
            model_bytes: report.model_bytes,
            n_positive: None,
            n_negative: None,
            n_templates,
        }
    }

    /// Adds window counts and the accuracy they imply.
    pub fn with_counts(mut self, n_positive: usize, n_negative: usize) -> Self {
        let correct = self.sensitivity * n_positive as f64 + self.specificity * n_negative as f64;
        self.accuracy = Some(correct / (n_positive + n_negative) as f64);
        self.n_positive = Some(n_positive);
        self.n_negative = Some(n_negative);
        self
    }
}

pub fn read_report(path: &Path) -> Result<ReportFile> {
    read_json(path)
}

pub fn write_roc_csv(path: &Path, points: &[RocPoint]) -> Result<()> {
    let mut text = String::from("param,fpr,tpr\n");
    for p in points {
        text.push_str(&format!("{},{},{}\n", p.param, p.fpr, p.tpr));
    }
    write_bytes(path, text.as_bytes())
}

pub fn write_trace_csv(path: &Path, trace: &TrainTrace) -> Result<()> {
    let mut text = String::from("K,L,precision\n");
    for s in &trace.steps {
        text.push_str(&format!("{},{},{}\n", s.clusters, s.total_cost, s.precision));
    }
    write_bytes(path, text.as_bytes())
}

pub fn write_spans_csv(path: &Path, spans: &[EventSpan]) -> Result<()> {
    write_annotations(path, spans)
}
