//! Multi-center classifier.
//!
//! A trained model is a list of templates, each a center window with a
//! coverage radius. A sample is positive when it falls inside the ball of any
//! of the first `top_k` templates, with every radius scaled by
//! `threshold_scale`. Both knobs trade sensitivity against specificity.

mod cluster;
mod rank;
mod train;

use alloc::string::String;
use alloc::vec::Vec;

use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::window::Window;

pub use cluster::{
    cluster_assign, cluster_cost, derive_threshold, select_seed, update_center, Assignment,
};
pub use rank::rank_templates;
pub(crate) use rank::{apply_order, rank_order};
pub use train::{train, TraceStep, TrainTrace};

/// Score reported when a sample is outside every zero-radius template.
pub const NO_MATCH_SCORE: f64 = f64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Minimax-medoid centers, single assignment, cost-greedy seeds.
    #[default]
    Improved,
    /// Mean centers, multi-assignment, random seeds. Kept for comparison runs.
    Original,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Improved => "improved",
            Variant::Original => "original",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopMode {
    /// Stop once the total discrepancy cost is at most `H`.
    CostThreshold(f64),
    /// Stop once training precision reaches the target.
    PrecisionTarget(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub stop: StopMode,
    pub max_clusters: usize,
    pub variant: Variant,
    pub distance: DistanceSpec,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            stop: StopMode::PrecisionTarget(0.8),
            max_clusters: 50,
            variant: Variant::Improved,
            distance: DistanceSpec::EUCLIDEAN,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_clusters == 0 {
            return Err(Error::InvalidParameter("max_clusters must be >= 1".into()));
        }
        match self.stop {
            StopMode::PrecisionTarget(p) if !(p > 0.0 && p <= 1.0) => Err(
                Error::InvalidParameter(alloc::format!("precision target {p} outside (0, 1]")),
            ),
            StopMode::CostThreshold(h) if !(h >= 0.0) => Err(Error::InvalidParameter(
                alloc::format!("cost threshold {h} must be non-negative"),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub center: Window,
    pub radius: f64,
    /// 1-based greedy importance, set by [`rank_templates`].
    pub rank: Option<usize>,
    /// Positives newly covered when this template was ranked.
    pub coverage_count: usize,
}

impl Template {
    pub fn covers(&self, distance: f64, threshold_scale: f64) -> bool {
        distance <= threshold_scale * self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MccModel {
    pub templates: Vec<Template>,
    pub distance: DistanceSpec,
    pub window_shape: (usize, usize),
    pub preprocessing_fingerprint: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub positive: bool,
    /// Template with the smallest distance-to-radius ratio, if any is finite.
    pub best_template: Option<usize>,
    pub score: f64,
}

impl MccModel {
    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Checks structural invariants: non-empty, matching center shapes,
    /// non-negative radii, and ranks forming a permutation of `1..=K`.
    pub fn validate(&self) -> Result<()> {
        if self.templates.is_empty() {
            return Err(Error::Empty("template list"));
        }
        let mut seen = alloc::vec![false; self.templates.len()];
        let mut ranked = 0;
        for t in &self.templates {
            if !(t.radius >= 0.0) || !t.radius.is_finite() {
                return Err(Error::InvalidParameter("template radius must be finite and >= 0".into()));
            }
            self.check_shape(&t.center)?;
            if let Some(r) = t.rank {
                if r == 0 || r > seen.len() || seen[r - 1] {
                    return Err(Error::InvalidParameter("template ranks are not a permutation".into()));
                }
                seen[r - 1] = true;
                ranked += 1;
            }
        }
        if ranked != 0 && ranked != seen.len() {
            return Err(Error::InvalidParameter("some templates are unranked".into()));
        }
        Ok(())
    }

    /// Rejects windows that contradict the training window shape. Elastic
    /// distances only require the channel count to agree.
    pub fn check_shape(&self, w: &Window) -> Result<()> {
        let (len, channels) = self.window_shape;
        let len_ok = match self.distance.kind {
            crate::DistanceKind::EuclideanFlat => w.len() == len,
            crate::DistanceKind::DtwDependent => true,
        };
        if w.channels() != channels {
            return Err(Error::ChannelMismatch {
                left: channels,
                right: w.channels(),
            });
        }
        if !len_ok {
            return Err(Error::ShapeMismatch {
                left_len: len,
                left_channels: channels,
                right_len: w.len(),
                right_channels: w.channels(),
            });
        }
        Ok(())
    }

    /// Distances from `sample` to every template center, in template order.
    pub fn template_distances(&self, sample: &Window) -> Result<Vec<f64>> {
        self.check_shape(sample)?;
        self.templates
            .iter()
            .map(|t| self.distance.distance(sample, &t.center))
            .collect()
    }

    pub fn predict(&self, sample: &Window, top_k: usize, threshold_scale: f64) -> Result<Prediction> {
        self.check_operating_point(top_k, threshold_scale)?;
        self.check_shape(sample)?;
        let mut dists = Vec::with_capacity(top_k);
        for t in &self.templates[..top_k] {
            dists.push(self.distance.distance(sample, &t.center)?);
        }
        Ok(self.predict_from_distances(&dists, top_k, threshold_scale))
    }

    pub fn check_operating_point(&self, top_k: usize, threshold_scale: f64) -> Result<()> {
        if top_k == 0 || top_k > self.templates.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "top_k {top_k} outside 1..={}",
                self.templates.len()
            )));
        }
        if !(threshold_scale > 0.0) || !threshold_scale.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "threshold scale {threshold_scale} must be positive"
            )));
        }
        Ok(())
    }

    /// Decision from precomputed distances to the first `top_k` templates.
    pub fn predict_from_distances(&self, dists: &[f64], top_k: usize, threshold_scale: f64) -> Prediction {
        let mut positive = false;
        let mut best: Option<(usize, f64)> = None;
        for (i, (t, &d)) in self.templates.iter().zip(dists).take(top_k).enumerate() {
            positive |= t.covers(d, threshold_scale);
            let ratio = score_ratio(d, t.radius);
            if ratio < NO_MATCH_SCORE && best.is_none_or(|(_, b)| ratio < b) {
                best = Some((i, ratio));
            }
        }
        Prediction {
            positive,
            best_template: best.map(|(i, _)| i),
            score: best.map_or(NO_MATCH_SCORE, |(_, s)| s),
        }
    }

    /// Minimum distance-to-radius ratio over the first `top_k` templates. For
    /// a positive scale, a sample is predicted positive iff its score is at
    /// most the scale.
    pub fn score_from_distances(&self, dists: &[f64], top_k: usize) -> f64 {
        self.templates
            .iter()
            .zip(dists)
            .take(top_k)
            .map(|(t, &d)| score_ratio(d, t.radius))
            .fold(NO_MATCH_SCORE, f64::min)
    }
}

fn score_ratio(distance: f64, radius: f64) -> f64 {
    if radius > 0.0 {
        distance / radius
    } else if distance == 0.0 {
        0.0
    } else {
        NO_MATCH_SCORE
    }
}
