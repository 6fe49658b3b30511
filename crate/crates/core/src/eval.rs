//! Event- and sample-level metrics, ROC sweeps and leave-one-subject-out
//! cross validation.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::mcc::{apply_order, rank_order, train, MccModel, TrainConfig};
use crate::preprocess::EventSpan;
use crate::window::Window;

/// Merges overlapping or touching `(start, length)` windows into maximal
/// sorted, disjoint sample ranges.
pub fn merge_windows(hits: &[(usize, usize)]) -> Vec<Range<usize>> {
    let mut ranges: Vec<Range<usize>> = hits
        .iter()
        .filter(|(_, len)| *len > 0)
        .map(|&(s, len)| s..s + len)
        .collect();
    ranges.sort_by_key(|r| (r.start, r.end));
    let mut merged: Vec<Range<usize>> = Vec::with_capacity(ranges.len());
    for r in ranges {
        match merged.last_mut() {
            Some(last) if r.start <= last.end => last.end = last.end.max(r.end),
            _ => merged.push(r),
        }
    }
    merged
}

/// Converts sample ranges to spans in seconds.
pub fn ranges_to_spans(ranges: &[Range<usize>], sample_rate_hz: f64, label: &str) -> Vec<EventSpan> {
    ranges
        .iter()
        .map(|r| EventSpan {
            start_s: r.start as f64 / sample_rate_hz,
            end_s: r.end as f64 / sample_rate_hz,
            label: label.into(),
        })
        .collect()
}

/// Fraction of ground-truth events intersected by at least one prediction.
pub fn event_sensitivity(predicted: &[EventSpan], truth: &[EventSpan]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::NotApplicable("event sensitivity"));
    }
    let hit = truth
        .iter()
        .filter(|t| predicted.iter().any(|p| p.intersects(t)))
        .count();
    Ok(hit as f64 / truth.len() as f64)
}

/// True-negative rate over windows that are all negative by construction.
pub fn sample_specificity(predictions: &[bool]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::NotApplicable("sample specificity"));
    }
    let negatives = predictions.iter().filter(|&&p| !p).count();
    Ok(negatives as f64 / predictions.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub param: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Sorts operating points by false-positive rate and collapses duplicate
/// rates to their best true-positive rate.
pub fn roc_curve(points: &[RocPoint]) -> Vec<RocPoint> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.fpr.total_cmp(&b.fpr).then(b.tpr.total_cmp(&a.tpr)));
    let mut out: Vec<RocPoint> = Vec::with_capacity(sorted.len());
    for p in sorted {
        match out.last() {
            Some(last) if last.fpr == p.fpr => {}
            _ => out.push(p),
        }
    }
    out
}

/// Trapezoidal area under the curve through `(0,0)`, the points, and `(1,1)`.
/// Points are expected in the order produced by [`roc_curve`].
pub fn auc_trapezoid(points: &[RocPoint]) -> f64 {
    let mut xs = vec![(0.0, 0.0)];
    xs.extend(points.iter().map(|p| (p.fpr, p.tpr)));
    xs.push((1.0, 1.0));
    xs.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * 0.5)
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepMode {
    /// Use the top `1..=max` ranked templates (capped at the model size).
    TemplateCount(usize),
    /// Scale every radius by each value of the grid.
    ThresholdScale(Vec<f64>),
}

/// 50 log-spaced scales in `[0.25, 4]`.
pub fn default_scale_grid() -> Vec<f64> {
    let (lo, hi) = (libm::log(0.25), libm::log(4.0));
    (0..50)
        .map(|i| libm::exp(lo + (hi - lo) * i as f64 / 49.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub top_k: usize,
    pub threshold_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionMetrics {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// At the report's operating point.
    pub sensitivity: f64,
    pub specificity: f64,
    pub auc: f64,
    pub roc_points: Vec<RocPoint>,
    pub operating_point: OperatingPoint,
    pub per_session: BTreeMap<String, SessionMetrics>,
    pub timing_ns_per_inference: Option<f64>,
    pub model_bytes: Option<u64>,
}

impl EvalReport {
    fn from_points(points: &[RocPoint], sensitivity: f64, specificity: f64, op: OperatingPoint) -> Self {
        let roc_points = roc_curve(points);
        Self {
            sensitivity,
            specificity,
            auc: auc_trapezoid(&roc_points),
            roc_points,
            operating_point: op,
            per_session: BTreeMap::new(),
            timing_ns_per_inference: None,
            model_bytes: None,
        }
    }
}

/// Distances from each sample to every template.
pub fn distance_table(model: &MccModel, samples: &[Window]) -> Result<Vec<Vec<f64>>> {
    samples.iter().map(|s| model.template_distances(s)).collect()
}

fn positive_rate(model: &MccModel, table: &[Vec<f64>], top_k: usize, scale: f64) -> f64 {
    let hits = table
        .iter()
        .filter(|d| model.predict_from_distances(d, top_k, scale).positive)
        .count();
    hits as f64 / table.len() as f64
}

/// Window-level (sensitivity, specificity) at one operating point.
pub fn evaluate_windows(
    model: &MccModel,
    positives: &[Window],
    negatives: &[Window],
    op: OperatingPoint,
) -> Result<(f64, f64)> {
    model.check_operating_point(op.top_k, op.threshold_scale)?;
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let pos = distance_table(model, positives)?;
    let neg = distance_table(model, negatives)?;
    Ok((
        positive_rate(model, &pos, op.top_k, op.threshold_scale),
        1.0 - positive_rate(model, &neg, op.top_k, op.threshold_scale),
    ))
}

/// Sweeps one operating knob and integrates the ROC. Sensitivity and
/// specificity are reported at `op`.
pub fn roc_sweep(
    model: &MccModel,
    positives: &[Window],
    negatives: &[Window],
    mode: &SweepMode,
    op: OperatingPoint,
) -> Result<EvalReport> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    model.check_operating_point(op.top_k, op.threshold_scale)?;
    let pos = distance_table(model, positives)?;
    let neg = distance_table(model, negatives)?;
    let points = sweep_points(model, &pos, &neg, mode, op)?;
    let sens = positive_rate(model, &pos, op.top_k, op.threshold_scale);
    let spec = 1.0 - positive_rate(model, &neg, op.top_k, op.threshold_scale);
    Ok(EvalReport::from_points(&points, sens, spec, op))
}

fn sweep_points(
    model: &MccModel,
    pos: &[Vec<f64>],
    neg: &[Vec<f64>],
    mode: &SweepMode,
    op: OperatingPoint,
) -> Result<Vec<RocPoint>> {
    let point = |k: usize, s: f64, param: f64| RocPoint {
        param,
        tpr: positive_rate(model, pos, k, s),
        fpr: positive_rate(model, neg, k, s),
    };
    match mode {
        SweepMode::TemplateCount(max) => {
            if *max == 0 {
                return Err(Error::InvalidParameter("template sweep needs max >= 1".into()));
            }
            Ok((1..=(*max).min(model.len()))
                .map(|k| point(k, op.threshold_scale, k as f64))
                .collect())
        }
        SweepMode::ThresholdScale(grid) => {
            if grid.is_empty() || grid.iter().any(|s| !(*s > 0.0)) {
                return Err(Error::InvalidParameter("scale grid must be non-empty and positive".into()));
            }
            Ok(grid.iter().map(|&s| point(op.top_k, s, s)).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectData {
    pub positives: Vec<Window>,
    pub negatives: Vec<Window>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LosoConfig {
    pub train: TrainConfig,
    /// Templates used at the operating point; `None` uses all of them.
    pub top_k: Option<usize>,
    pub threshold_scale: f64,
    pub sweep: SweepMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub held_out: String,
    /// Subject each pooled template was trained on, in ranked order.
    pub template_sources: Vec<String>,
    pub model: MccModel,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LosoReport {
    /// Macro-averaged sensitivity and specificity; ROC averaged per sweep
    /// parameter over the parameters every fold shares, with its AUC.
    pub aggregate: EvalReport,
    /// Mean of the per-fold AUCs.
    pub mean_fold_auc: f64,
    pub folds: Vec<FoldResult>,
}

/// Leave-one-subject-out: per fold, one model per training subject, pooled
/// and greedily ranked on all training positives, then evaluated on the
/// held-out subject.
pub fn losocv(subjects: &BTreeMap<String, SubjectData>, cfg: &LosoConfig) -> Result<LosoReport> {
    if subjects.len() < 2 {
        return Err(Error::InvalidParameter("leave-one-subject-out needs at least 2 subjects".into()));
    }
    let mut folds = Vec::with_capacity(subjects.len());
    for held_out in subjects.keys() {
        let mut pooled = Vec::new();
        let mut sources = Vec::new();
        let mut train_pos = Vec::new();
        for (name, data) in subjects.iter().filter(|(n, _)| *n != held_out) {
            if data.positives.is_empty() {
                continue;
            }
            let (model, _) = train(&data.positives, &data.negatives, &cfg.train)?;
            sources.extend(core::iter::repeat_n(name.clone(), model.len()));
            pooled.push(model);
            train_pos.extend(data.positives.iter().cloned());
        }
        let Some(first) = pooled.first() else {
            return Err(Error::Empty("training positives"));
        };
        let mut merged = MccModel {
            templates: Vec::new(),
            distance: first.distance,
            window_shape: first.window_shape,
            preprocessing_fingerprint: first.preprocessing_fingerprint.clone(),
        };
        for m in &pooled {
            merged.templates.extend(m.templates.iter().cloned());
        }
        let order = rank_order(&merged, &train_pos)?;
        let ranked = apply_order(&merged, &order);
        let template_sources = order.iter().map(|&(i, _)| sources[i].clone()).collect();

        let data = &subjects[held_out];
        let op = OperatingPoint {
            top_k: cfg.top_k.unwrap_or(ranked.len()).min(ranked.len()),
            threshold_scale: cfg.threshold_scale,
        };
        let mut report = roc_sweep(&ranked, &data.positives, &data.negatives, &cfg.sweep, op)?;
        report.per_session.insert(
            held_out.clone(),
            SessionMetrics {
                sensitivity: Some(report.sensitivity),
                specificity: Some(report.specificity),
                auc: Some(report.auc),
            },
        );
        folds.push(FoldResult {
            held_out: held_out.clone(),
            template_sources,
            model: ranked,
            report,
        });
    }

    let n = folds.len() as f64;
    let mean = |f: fn(&FoldResult) -> f64| folds.iter().map(f).sum::<f64>() / n;
    let sensitivity = mean(|f| f.report.sensitivity);
    let specificity = mean(|f| f.report.specificity);
    let mean_fold_auc = mean(|f| f.report.auc);

    // Average raw sweep points by parameter across folds that all have it.
    let mut by_param: BTreeMap<u64, (f64, f64, f64, usize)> = BTreeMap::new();
    for f in &folds {
        for p in &f.report.roc_points {
            let e = by_param.entry(p.param.to_bits()).or_insert((p.param, 0.0, 0.0, 0));
            e.1 += p.fpr;
            e.2 += p.tpr;
            e.3 += 1;
        }
    }
    let points: Vec<RocPoint> = by_param
        .values()
        .filter(|e| e.3 == folds.len())
        .map(|&(param, fpr, tpr, c)| RocPoint {
            param,
            fpr: fpr / c as f64,
            tpr: tpr / c as f64,
        })
        .collect();
    let op = folds[0].report.operating_point;
    let mut aggregate = EvalReport::from_points(&points, sensitivity, specificity, op);
    for f in &folds {
        aggregate.per_session.extend(f.report.per_session.clone());
    }
    Ok(LosoReport {
        aggregate,
        mean_fold_auc,
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_cases() {
        assert!(merge_windows(&[]).is_empty());
        assert_eq!(merge_windows(&[(10, 20), (0, 20)]), vec![0..30]);
        assert_eq!(merge_windows(&[(0, 5), (5, 5)]), vec![0..10]);
        assert_eq!(merge_windows(&[(0, 5), (6, 5)]), vec![0..5, 6..11]);
        assert_eq!(merge_windows(&[(0, 20), (2, 3)]), vec![0..20]);
    }

    fn span(a: f64, b: f64) -> EventSpan {
        EventSpan::new(a, b, "e").unwrap()
    }

    #[test]
    fn sensitivity_cases() {
        let truth: Vec<EventSpan> = (0..10).map(|i| span(i as f64, i as f64 + 0.4)).collect();
        assert_eq!(event_sensitivity(&truth, &truth).unwrap(), 1.0);
        assert_eq!(event_sensitivity(&[], &truth).unwrap(), 0.0);
        // One long prediction over events 0..=4, and two short ones on 6 and 8.
        let pred = [span(0.2, 4.1), span(6.3, 6.5), span(8.0, 8.1)];
        assert_eq!(event_sensitivity(&pred, &truth).unwrap(), 0.7);
        assert!(matches!(event_sensitivity(&pred, &[]), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn specificity_cases() {
        assert_eq!(sample_specificity(&[false; 4]).unwrap(), 1.0);
        assert_eq!(sample_specificity(&[true; 4]).unwrap(), 0.0);
        assert_eq!(sample_specificity(&[true, false, false, false]).unwrap(), 0.75);
        assert!(sample_specificity(&[]).is_err());
    }

    #[test]
    fn auc_with_anchors() {
        assert_eq!(auc_trapezoid(&[]), 0.5);
        let perfect = roc_curve(&[RocPoint { param: 1.0, fpr: 0.0, tpr: 1.0 }]);
        assert_eq!(auc_trapezoid(&perfect), 1.0);
        let pts = roc_curve(&[
            RocPoint { param: 2.0, fpr: 0.5, tpr: 0.5 },
            RocPoint { param: 1.0, fpr: 0.5, tpr: 0.9 },
        ]);
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].tpr, 0.9);
        assert!((auc_trapezoid(&pts) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn scale_grid_shape() {
        let g = default_scale_grid();
        assert_eq!(g.len(), 50);
        assert!((g[0] - 0.25).abs() < 1e-12 && (g[49] - 4.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
