//! Jittering, scaling and magnitude warping of training windows.
//!
//! Every function is deterministic given [`AugmentConfig::rng_seed`]. Batch
//! augmentation draws each original's randomness from its own substream so
//! items do not depend on each other.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::window::Window;

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    /// Noise std as a fraction of each channel's std.
    pub jitter_sigma: f64,
    pub scale_sigma: f64,
    pub warp_knots: usize,
    pub warp_sigma: f64,
    pub rng_seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            jitter_sigma: 0.03,
            scale_sigma: 0.1,
            warp_knots: 4,
            warp_sigma: 0.2,
            rng_seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("jitter_sigma", self.jitter_sigma),
            ("scale_sigma", self.scale_sigma),
            ("warp_sigma", self.warp_sigma),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(alloc::format!("{name} must be positive")));
            }
        }
        if self.warp_knots < 2 {
            return Err(Error::InvalidParameter("warp_knots must be >= 2".into()));
        }
        Ok(())
    }
}

const SCALE_CLAMP: (f64, f64) = (0.1, 3.0);

fn normal(mean: f64, std: f64) -> Normal<f64> {
    Normal::new(mean, std).expect("validated standard deviation")
}

fn channel_std(w: &Window, d: usize) -> f64 {
    let n = w.len() as f64;
    let mean = w.channel(d).sum::<f64>() / n;
    libm::sqrt(w.channel(d).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n)
}

pub fn jitter_with<R: Rng + ?Sized>(w: &Window, sigma: f64, rng: &mut R) -> Window {
    let stds: Vec<f64> = (0..w.channels()).map(|d| sigma * channel_std(w, d)).collect();
    let unit = normal(0.0, 1.0);
    w.map_indexed(|_, d, v| v + stds[d] * unit.sample(rng))
}

/// Scale factor `~ Normal(1, sigma)`, clamped to `[0.1, 3]`.
pub fn draw_scale<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    normal(1.0, sigma).sample(rng).clamp(SCALE_CLAMP.0, SCALE_CLAMP.1)
}

pub fn scale_by(w: &Window, factor: f64) -> Window {
    w.map_indexed(|_, _, v| v * factor)
}

pub fn draw_knots<R: Rng + ?Sized>(knots: usize, sigma: f64, rng: &mut R) -> Vec<f64> {
    let dist = normal(1.0, sigma);
    (0..knots).map(|_| dist.sample(rng)).collect()
}

/// Envelope through `knot_values` placed at equally spaced positions over
/// `0..len` (endpoints included), by natural cubic spline.
pub fn warp_envelope(knot_values: &[f64], len: usize) -> Result<Vec<f64>> {
    if knot_values.len() < 2 {
        return Err(Error::InvalidParameter("warp_knots must be >= 2".into()));
    }
    if len <= 1 {
        return Ok(vec![knot_values[0]; len]);
    }
    let span = (len - 1) as f64;
    let step = span / (knot_values.len() - 1) as f64;
    let xs: Vec<f64> = (0..knot_values.len()).map(|i| i as f64 * step).collect();
    let spline = NaturalSpline::new(&xs, knot_values);
    Ok((0..len).map(|t| spline.eval(t as f64)).collect())
}

pub fn warp_with_knots(w: &Window, knot_values: &[f64]) -> Result<Window> {
    let env = warp_envelope(knot_values, w.len())?;
    Ok(w.map_indexed(|t, _, v| v * env[t]))
}

/// Adds zero-mean Gaussian noise with per-channel std `jitter_sigma * std(channel)`.
pub fn jitter(w: &Window, cfg: &AugmentConfig) -> Result<Window> {
    cfg.validate()?;
    Ok(jitter_with(w, cfg.jitter_sigma, &mut substream(cfg.rng_seed, 0)))
}

/// Multiplies the whole window by one random factor.
pub fn scale(w: &Window, cfg: &AugmentConfig) -> Result<Window> {
    cfg.validate()?;
    Ok(scale_by(w, draw_scale(cfg.scale_sigma, &mut substream(cfg.rng_seed, 0))))
}

/// Multiplies every channel by a smooth random envelope shared across channels.
pub fn magnitude_warp(w: &Window, cfg: &AugmentConfig) -> Result<Window> {
    cfg.validate()?;
    let knots = draw_knots(cfg.warp_knots, cfg.warp_sigma, &mut substream(cfg.rng_seed, 0));
    warp_with_knots(w, &knots)
}

/// Originals followed by one jittered, one scaled and one warped copy of
/// each, in that order: `[originals.., jittered.., scaled.., warped..]`.
pub fn augment_4x(windows: &[Window], cfg: &AugmentConfig) -> Result<Vec<Window>> {
    cfg.validate()?;
    let n = windows.len();
    let mut out = Vec::with_capacity(4 * n);
    out.extend_from_slice(windows);
    let mut jittered = Vec::with_capacity(n);
    let mut scaled = Vec::with_capacity(n);
    let mut warped = Vec::with_capacity(n);
    for (i, w) in windows.iter().enumerate() {
        let mut rng = substream(cfg.rng_seed, i as u64 + 1);
        jittered.push(jitter_with(w, cfg.jitter_sigma, &mut rng));
        scaled.push(scale_by(w, draw_scale(cfg.scale_sigma, &mut rng)));
        let knots = draw_knots(cfg.warp_knots, cfg.warp_sigma, &mut rng);
        warped.push(warp_with_knots(w, &knots)?);
    }
    out.extend(jittered);
    out.extend(scaled);
    out.extend(warped);
    Ok(out)
}

/// Natural cubic spline (zero second derivative at both ends).
struct NaturalSpline<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    m: Vec<f64>,
}

impl<'a> NaturalSpline<'a> {
    fn new(xs: &'a [f64], ys: &'a [f64]) -> Self {
        let n = xs.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            let mut upper = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            }
            for i in 1..k {
                let lower = xs[i + 1] - xs[i];
                let f = lower / diag[i - 1];
                diag[i] -= f * upper[i - 1];
                rhs[i] -= f * rhs[i - 1];
            }
            for i in (0..k).rev() {
                let next = if i + 1 < k { m[i + 2] } else { 0.0 };
                m[i + 1] = (rhs[i] - upper[i] * next) / diag[i];
            }
        }
        Self { xs, ys, m }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = self.xs[1..n - 1].partition_point(|&k| k <= x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}
