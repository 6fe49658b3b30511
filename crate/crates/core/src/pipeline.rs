//! End-to-end event detection: conditioning, windowing, augmentation,
//! training, sliding-window inference, merging and event-level metrics.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index::sample;

use crate::augment::{augment_4x, AugmentConfig};
use crate::error::{Error, Result};
use crate::eval::{
    event_sensitivity, merge_windows, ranges_to_spans, roc_curve, auc_trapezoid, EvalReport,
    OperatingPoint, RocPoint, SessionMetrics, SweepMode,
};
use crate::mcc::{rank_templates, train, MccModel, TrainConfig, TrainTrace};
use crate::preprocess::{
    extract_event_windows, select_channels, slide_windows, window_samples, EventSpan, FilterSpec,
    SensorSession,
};
use crate::rng::substream;
use crate::window::Window;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub channels: Vec<String>,
    pub filter: FilterSpec,
    pub window_s: f64,
    /// Stride for negative training windows.
    pub train_stride_s: f64,
    /// Stride at inference.
    pub infer_stride_s: f64,
    /// Negatives kept per (augmented) positive.
    pub negative_ratio: usize,
    pub event_label: String,
    pub augment: AugmentConfig,
    pub train: TrainConfig,
    /// Seed for negative subsampling.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            channels: ["x", "y"].map(String::from).to_vec(),
            filter: FilterSpec::default(),
            window_s: 0.4,
            train_stride_s: 0.1,
            infer_stride_s: 0.02,
            negative_ratio: 4,
            event_label: "cough".into(),
            augment: AugmentConfig::default(),
            train: TrainConfig::default(),
            seed: 0,
        }
    }
}

/// Channel selection followed by the filter chain.
pub fn condition(session: &SensorSession, cfg: &PipelineConfig) -> Result<SensorSession> {
    let selected = select_channels(session, &cfg.channels)?;
    cfg.filter.apply(&selected)
}

/// Augmented positives from annotated events and subsampled negatives from
/// event-free sessions.
pub fn training_windows(
    event_sessions: &[SensorSession],
    background_sessions: &[SensorSession],
    cfg: &PipelineConfig,
) -> Result<(Vec<Window>, Vec<Window>)> {
    let mut originals = Vec::new();
    for s in event_sessions {
        originals.extend(extract_event_windows(&condition(s, cfg)?, &cfg.event_label, cfg.window_s)?);
    }
    if originals.is_empty() {
        return Err(Error::Empty("annotated events"));
    }
    let positives = augment_4x(&originals, &cfg.augment)?;

    let mut pool = Vec::new();
    for s in background_sessions {
        pool.extend(
            slide_windows(&condition(s, cfg)?, cfg.window_s, cfg.train_stride_s)?
                .into_iter()
                .map(|(_, w)| w),
        );
    }
    let wanted = cfg.negative_ratio * positives.len();
    let negatives = if pool.len() <= wanted {
        pool
    } else {
        let mut picked = sample(&mut substream(cfg.seed, 7), pool.len(), wanted).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| pool[i].clone()).collect()
    };
    Ok((positives, negatives))
}

/// Trains and ranks a model on the pipeline's training windows.
pub fn train_pipeline(
    event_sessions: &[SensorSession],
    background_sessions: &[SensorSession],
    cfg: &PipelineConfig,
) -> Result<(MccModel, TrainTrace)> {
    let (pos, neg) = training_windows(event_sessions, background_sessions, cfg)?;
    let (model, trace) = train(&pos, &neg, &cfg.train)?;
    Ok((rank_templates(&model, &pos)?, trace))
}

/// Sliding-window distances for one session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionDistances {
    pub starts: Vec<usize>,
    pub window_len: usize,
    pub sample_rate_hz: f64,
    /// `table[w][k]`: distance from window `w` to template `k`.
    pub table: Vec<Vec<f64>>,
}

impl SessionDistances {
    pub fn predictions(&self, model: &MccModel, op: OperatingPoint) -> Vec<bool> {
        self.table
            .iter()
            .map(|d| model.predict_from_distances(d, op.top_k, op.threshold_scale).positive)
            .collect()
    }

    /// Merged spans of positive windows.
    pub fn detections(&self, model: &MccModel, op: OperatingPoint) -> Vec<EventSpan> {
        let hits: Vec<(usize, usize)> = self
            .predictions(model, op)
            .into_iter()
            .zip(&self.starts)
            .filter(|(p, _)| *p)
            .map(|(_, &s)| (s, self.window_len))
            .collect();
        ranges_to_spans(&merge_windows(&hits), self.sample_rate_hz, "detected")
    }
}

pub fn session_distances(model: &MccModel, session: &SensorSession, cfg: &PipelineConfig) -> Result<SessionDistances> {
    let conditioned = condition(session, cfg)?;
    let windows = slide_windows(&conditioned, cfg.window_s, cfg.infer_stride_s)?;
    let mut starts = Vec::with_capacity(windows.len());
    let mut table = Vec::with_capacity(windows.len());
    for (s, w) in windows {
        starts.push(s);
        table.push(model.template_distances(&w)?);
    }
    Ok(SessionDistances {
        starts,
        window_len: window_samples(cfg.window_s, session.sample_rate_hz)?,
        sample_rate_hz: session.sample_rate_hz,
        table,
    })
}

/// Event sensitivity over annotated sessions and sample specificity over
/// event-free sessions, pooled across sessions.
pub struct EventEvaluator<'a> {
    model: &'a MccModel,
    label: String,
    events: Vec<(SessionDistances, Vec<EventSpan>)>,
    background: Vec<SessionDistances>,
}

impl<'a> EventEvaluator<'a> {
    pub fn new(
        model: &'a MccModel,
        event_sessions: &[SensorSession],
        background_sessions: &[SensorSession],
        cfg: &PipelineConfig,
    ) -> Result<Self> {
        let events = event_sessions
            .iter()
            .map(|s| {
                let truth = s
                    .annotations
                    .iter()
                    .filter(|a| a.label == cfg.event_label)
                    .cloned()
                    .collect();
                Ok((session_distances(model, s, cfg)?, truth))
            })
            .collect::<Result<Vec<_>>>()?;
        let background = background_sessions
            .iter()
            .map(|s| session_distances(model, s, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            label: cfg.event_label.clone(),
            events,
            background,
        })
    }

    /// Pooled (event sensitivity, sample specificity).
    pub fn rates(&self, op: OperatingPoint) -> Result<(f64, f64)> {
        let mut hit = 0.0;
        let mut truth_total = 0usize;
        for (dist, truth) in &self.events {
            if truth.is_empty() {
                continue;
            }
            hit += event_sensitivity(&dist.detections(self.model, op), truth)? * truth.len() as f64;
            truth_total += truth.len();
        }
        let mut negatives = 0usize;
        let mut windows = 0usize;
        for dist in &self.background {
            let preds = dist.predictions(self.model, op);
            negatives += preds.iter().filter(|p| !**p).count();
            windows += preds.len();
        }
        if truth_total == 0 {
            return Err(Error::NotApplicable("event sensitivity"));
        }
        if windows == 0 {
            return Err(Error::NotApplicable("sample specificity"));
        }
        Ok((hit / truth_total as f64, negatives as f64 / windows as f64))
    }

    /// ROC over the sweep, with metrics at `op` and per-session detail.
    pub fn report(&self, mode: &SweepMode, op: OperatingPoint) -> Result<EvalReport> {
        self.model.check_operating_point(op.top_k, op.threshold_scale)?;
        let ops: Vec<(f64, OperatingPoint)> = match mode {
            SweepMode::TemplateCount(max) => (1..=(*max).min(self.model.len()))
                .map(|k| (k as f64, OperatingPoint { top_k: k, ..op }))
                .collect(),
            SweepMode::ThresholdScale(grid) => grid
                .iter()
                .map(|&s| (s, OperatingPoint { threshold_scale: s, ..op }))
                .collect(),
        };
        if ops.is_empty() {
            return Err(Error::Empty("sweep"));
        }
        let mut points = Vec::with_capacity(ops.len());
        for (param, o) in ops {
            let (tpr, spec) = self.rates(o)?;
            points.push(RocPoint { param, fpr: 1.0 - spec, tpr });
        }
        let (sensitivity, specificity) = self.rates(op)?;
        let roc_points = roc_curve(&points);
        let mut per_session = BTreeMap::new();
        for (i, (dist, truth)) in self.events.iter().enumerate() {
            let sens = event_sensitivity(&dist.detections(self.model, op), truth).ok();
            per_session.insert(
                format!("{}-{i:03}", self.label),
                SessionMetrics { sensitivity: sens, specificity: None, auc: None },
            );
        }
        for (i, dist) in self.background.iter().enumerate() {
            let preds = dist.predictions(self.model, op);
            let spec = crate::eval::sample_specificity(&preds).ok();
            per_session.insert(
                format!("background-{i:03}"),
                SessionMetrics { sensitivity: None, specificity: spec, auc: None },
            );
        }
        Ok(EvalReport {
            sensitivity,
            specificity,
            auc: auc_trapezoid(&roc_points),
            roc_points,
            operating_point: op,
            per_session,
            timing_ns_per_inference: None,
            model_bytes: None,
        })
    }
}
