//! Synthetic dataset generators and the binary labeled-set container.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::preprocess::{EventSpan, SensorSession};
use crate::rng::substream;
use crate::window::Window;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub name: String,
    pub samples: Vec<Window>,
    pub labels: Vec<bool>,
    pub split: Option<Split>,
}

impl LabeledSet {
    pub fn new(name: impl Into<String>, samples: Vec<Window>, labels: Vec<bool>) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} samples but {} labels",
                samples.len(),
                labels.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            samples,
            labels,
            split: None,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn with_split(mut self, split: Split) -> Result<Self> {
        let n = self.len();
        let mut seen = vec![false; n];
        for &i in split.train.iter().chain(&split.test) {
            if i >= n || seen[i] {
                return Err(Error::InvalidParameter("split indices overlap or are out of range".into()));
            }
            seen[i] = true;
        }
        self.split = Some(split);
        Ok(self)
    }

    /// Random split with `round(train_fraction * n)` training indices, each
    /// half sorted ascending.
    pub fn with_random_split(self, train_fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&train_fraction) {
            return Err(Error::InvalidParameter("train fraction outside [0, 1]".into()));
        }
        let n = self.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut substream(seed, 1));
        let n_train = libm::round(train_fraction * n as f64) as usize;
        let mut train = idx[..n_train].to_vec();
        let mut test = idx[n_train..].to_vec();
        train.sort_unstable();
        test.sort_unstable();
        self.with_split(Split { train, test })
    }

    /// `(positives, negatives)` among `indices`.
    pub fn partition(&self, indices: &[usize]) -> (Vec<Window>, Vec<Window>) {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for &i in indices {
            if self.labels[i] {
                pos.push(self.samples[i].clone());
            } else {
                neg.push(self.samples[i].clone());
            }
        }
        (pos, neg)
    }

    pub fn train_indices(&self) -> Vec<usize> {
        self.split.as_ref().map_or_else(|| (0..self.len()).collect(), |s| s.train.clone())
    }

    pub fn test_indices(&self) -> Vec<usize> {
        self.split.as_ref().map_or_else(Vec::new, |s| s.test.clone())
    }
}

pub const SNOWMAN_SIZE: usize = 1334;
pub const SNOWMAN_POSITIVES: usize = 889;

/// Two overlapping Gaussians: 889 positives from N((0,0), 3²I) and 445
/// negatives from N((0,3), I), as 1x2 windows, with a 70/30 random split.
///
/// The positive class is the wide Gaussian so that it is the 2:1 majority.
pub fn gen_snowman(seed: u64) -> LabeledSet {
    let set = gen_blobs(
        SNOWMAN_POSITIVES,
        SNOWMAN_SIZE - SNOWMAN_POSITIVES,
        [0.0, 0.0],
        [0.0, 3.0],
        3.0,
        1.0,
        seed,
    )
    .expect("constant parameters are valid");
    LabeledSet {
        name: "snowman".to_string(),
        ..set
    }
}

/// Isotropic 2-D Gaussian classes, positives first, with a 70/30 split.
pub fn gen_blobs(
    n_pos: usize,
    n_neg: usize,
    mu_pos: [f64; 2],
    mu_neg: [f64; 2],
    sigma_pos: f64,
    sigma_neg: f64,
    seed: u64,
) -> Result<LabeledSet> {
    if n_pos + n_neg == 0 {
        return Err(Error::InvalidParameter("blobs need at least one sample".into()));
    }
    if !(sigma_pos > 0.0 && sigma_neg > 0.0) {
        return Err(Error::InvalidParameter("blob sigmas must be positive".into()));
    }
    let mut rng = substream(seed, 0);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut samples = Vec::with_capacity(n_pos + n_neg);
    let mut labels = Vec::with_capacity(n_pos + n_neg);
    for (count, mu, sigma, label) in [(n_pos, mu_pos, sigma_pos, true), (n_neg, mu_neg, sigma_neg, false)] {
        for _ in 0..count {
            let x = mu[0] + sigma * unit.sample(&mut rng);
            let y = mu[1] + sigma * unit.sample(&mut rng);
            samples.push(Window::point(&[x, y])?);
            labels.push(label);
        }
    }
    LabeledSet::new("blobs", samples, labels)?.with_random_split(0.7, seed)
}

/// Hann-tapered sinusoid with `cycles` periods over `len` frames, scaled per
/// channel by `amplitudes`.
pub fn burst_template(len: usize, cycles: f64, amplitudes: &[f64]) -> Result<Window> {
    if len < 2 || amplitudes.is_empty() {
        return Err(Error::InvalidParameter("burst needs len >= 2 and at least one channel".into()));
    }
    let tau = 2.0 * core::f64::consts::PI;
    let mut values = Vec::with_capacity(len * amplitudes.len());
    for t in 0..len {
        let u = t as f64 / (len - 1) as f64;
        let v = libm::sin(tau * cycles * u) * 0.5 * (1.0 - libm::cos(tau * u));
        values.extend(amplitudes.iter().map(|a| a * v));
    }
    Window::from_row_major(values, len, amplitudes.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventSessionConfig {
    pub n_sessions: usize,
    pub events_per_session: usize,
    pub noise_sigma: f64,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    /// Label written to each injected event's annotation.
    pub label: String,
    pub seed: u64,
}

/// Gaussian-noise sessions with `event_template` added at random,
/// non-overlapping positions. Consecutive events are separated by at least
/// one template length. Channels are named `x`, `y`, `z` (then `ch3`, ...).
pub fn gen_event_sessions(event_template: &Window, cfg: &EventSessionConfig) -> Result<Vec<SensorSession>> {
    if !(cfg.noise_sigma >= 0.0) || !(cfg.sample_rate_hz > 0.0) || !(cfg.duration_s > 0.0) {
        return Err(Error::InvalidParameter("noise, sample rate and duration must be valid".into()));
    }
    let total = libm::round(cfg.duration_s * cfg.sample_rate_hz) as usize;
    let (n, d) = event_template.shape();
    let k = cfg.events_per_session;
    // k events plus k-1 gaps of one template length.
    let needed = (2 * k).saturating_sub(1) * n;
    if needed > total {
        return Err(Error::InvalidParameter(format!(
            "{k} events of {n} samples do not fit in {total} samples without overlap"
        )));
    }
    let slack = total - needed;
    let names: Vec<String> = (0..d)
        .map(|i| match i {
            0 => "x".to_string(),
            1 => "y".to_string(),
            2 => "z".to_string(),
            _ => format!("ch{i}"),
        })
        .collect();
    let noise = Normal::new(0.0, cfg.noise_sigma.max(f64::MIN_POSITIVE)).expect("non-negative sigma");

    (0..cfg.n_sessions)
        .map(|s| {
            let mut rng = substream(cfg.seed, s as u64);
            let mut values: Vec<f64> = if cfg.noise_sigma > 0.0 {
                (0..total * d).map(|_| noise.sample(&mut rng)).collect()
            } else {
                vec![0.0; total * d]
            };
            let mut offsets: Vec<usize> = (0..k).map(|_| rng.random_range(0..=slack)).collect();
            offsets.sort_unstable();
            let mut annotations = Vec::with_capacity(k);
            for (i, off) in offsets.into_iter().enumerate() {
                let start = off + 2 * i * n;
                for t in 0..n {
                    for c in 0..d {
                        values[(start + t) * d + c] += event_template.get(t, c);
                    }
                }
                annotations.push(EventSpan::new(
                    start as f64 / cfg.sample_rate_hz,
                    (start + n) as f64 / cfg.sample_rate_hz,
                    cfg.label.clone(),
                )?);
            }
            SensorSession::new(
                Window::from_row_major(values, total, d)?,
                cfg.sample_rate_hz,
                names.clone(),
                annotations,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snowman_counts_and_split() {
        let s = gen_snowman(7);
        assert_eq!(s.len(), SNOWMAN_SIZE);
        assert_eq!(s.labels.iter().filter(|&&l| l).count(), 889);
        let split = s.split.as_ref().unwrap();
        assert_eq!(split.train.len(), 934);
        assert_eq!(split.test.len(), 400);
        assert_eq!(s, gen_snowman(7));
        assert_ne!(s, gen_snowman(8));
    }

    #[test]
    fn blobs_edge_cases() {
        let all_neg = gen_blobs(0, 10, [0.0, 0.0], [1.0, 1.0], 1.0, 1.0, 1).unwrap();
        assert!(all_neg.labels.iter().all(|l| !l));
        assert!(gen_blobs(0, 0, [0.0; 2], [0.0; 2], 1.0, 1.0, 1).is_err());
        assert!(gen_blobs(1, 1, [0.0; 2], [0.0; 2], 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn split_validation() {
        let set = LabeledSet::new("t", vec![Window::point(&[0.0]).unwrap(); 3], vec![true, false, true]).unwrap();
        assert!(set
            .clone()
            .with_split(Split { train: vec![0, 1], test: vec![1] })
            .is_err());
        assert!(set.clone().with_split(Split { train: vec![0], test: vec![5] }).is_err());
        let ok = set.with_split(Split { train: vec![0, 2], test: vec![1] }).unwrap();
        let (p, n) = ok.partition(&ok.train_indices());
        assert_eq!((p.len(), n.len()), (2, 0));
        assert!(LabeledSet::new("t", vec![], vec![true]).is_err());
    }

    fn template() -> Window {
        let frames: Vec<[f64; 2]> = (0..20).map(|t| [t as f64, -(t as f64)]).collect();
        Window::from_frames(&frames).unwrap()
    }

    fn cfg(events: usize, noise: f64) -> EventSessionConfig {
        EventSessionConfig {
            n_sessions: 3,
            events_per_session: events,
            noise_sigma: noise,
            sample_rate_hz: 50.0,
            duration_s: 10.0,
            label: "event".into(),
            seed: 5,
        }
    }

    #[test]
    fn pure_noise_sessions() {
        let s = gen_event_sessions(&template(), &cfg(0, 1.0)).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|x| x.annotations.is_empty() && x.len() == 500));
        assert_eq!(s[0].channel_names, vec!["x", "y"]);
    }

    #[test]
    fn noiseless_events_equal_template() {
        let tpl = template();
        for session in gen_event_sessions(&tpl, &cfg(6, 0.0)).unwrap() {
            assert_eq!(session.annotations.len(), 6);
            for a in &session.annotations {
                let start = libm::round(a.start_s * 50.0) as usize;
                let w = crate::preprocess::slice_frames(&session.data, start, 20).unwrap();
                assert_eq!(w.values(), tpl.values());
            }
            for pair in session.annotations.windows(2) {
                assert!(pair[1].start_s >= pair[0].end_s);
            }
        }
    }

    #[test]
    fn overfull_sessions_fail() {
        // 13 events and 12 gaps of 20 samples fill 500 samples exactly.
        assert!(gen_event_sessions(&template(), &cfg(14, 0.1)).is_err());
        assert!(gen_event_sessions(&template(), &cfg(13, 0.1)).is_ok());
    }

    #[test]
    fn burst_tapers_to_zero() {
        let b = burst_template(21, 2.0, &[1.0, -3.0]).unwrap();
        assert_eq!(b.shape(), (21, 2));
        assert_eq!(b.frame(0), &[0.0, -0.0]);
        assert!(b.frame(20).iter().all(|v| v.abs() < 1e-12));
        assert!((b.get(5, 1) + 3.0 * b.get(5, 0)).abs() < 1e-12);
        assert!(burst_template(1, 1.0, &[1.0]).is_err());
    }
}
