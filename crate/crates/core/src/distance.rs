//! Distance kernels between multichannel windows.
//!
//! Two kernels are provided: a flat Euclidean distance over all entries and a
//! dependent multivariate DTW, where a single warping path aligns all channels
//! and the local cost is the unsquared Euclidean distance between frames. The
//! DTW value is the raw cumulative cost with no path-length normalization.

use alloc::vec;

use crate::error::{Error, Result};
use crate::window::{shape_mismatch, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    EuclideanFlat,
    DtwDependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DistanceSpec {
    pub kind: DistanceKind,
    /// Sakoe-Chiba half-width in frames. `None` leaves DTW unconstrained.
    pub band_radius: Option<usize>,
}

impl DistanceSpec {
    pub const EUCLIDEAN: DistanceSpec = DistanceSpec {
        kind: DistanceKind::EuclideanFlat,
        band_radius: None,
    };

    pub const DTW: DistanceSpec = DistanceSpec {
        kind: DistanceKind::DtwDependent,
        band_radius: None,
    };

    pub fn dtw_banded(band_radius: usize) -> Self {
        Self {
            kind: DistanceKind::DtwDependent,
            band_radius: Some(band_radius),
        }
    }

    pub fn distance(&self, a: &Window, b: &Window) -> Result<f64> {
        match self.kind {
            DistanceKind::EuclideanFlat => euclidean_flat(a, b),
            DistanceKind::DtwDependent => dtw_dependent(a, b, self.band_radius),
        }
    }

    /// Checks that `a` and `b` can be compared under this spec.
    pub fn check_compatible(&self, a: &Window, b: &Window) -> Result<()> {
        match self.kind {
            DistanceKind::EuclideanFlat if a.shape() != b.shape() => Err(shape_mismatch(a, b)),
            DistanceKind::DtwDependent if a.channels() != b.channels() => {
                Err(Error::ChannelMismatch {
                    left: a.channels(),
                    right: b.channels(),
                })
            }
            DistanceKind::DtwDependent => match self.band_radius {
                Some(band) if band < a.len().abs_diff(b.len()) => Err(Error::InfeasibleBand {
                    band,
                    left_len: a.len(),
                    right_len: b.len(),
                }),
                _ => Ok(()),
            },
            DistanceKind::EuclideanFlat => Ok(()),
        }
    }
}

pub fn euclidean_flat(a: &Window, b: &Window) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(shape_mismatch(a, b));
    }
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(libm::sqrt(sum))
}

/// Euclidean distance between two frames of equal width.
#[inline]
pub fn frame_distance(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    libm::sqrt(sum)
}

/// Dependent multivariate DTW with steps (1,0), (0,1), (1,1).
pub fn dtw_dependent(a: &Window, b: &Window, band_radius: Option<usize>) -> Result<f64> {
    if a.channels() != b.channels() {
        return Err(Error::ChannelMismatch {
            left: a.channels(),
            right: b.channels(),
        });
    }
    let (n, m) = (a.len(), b.len());
    let band = match band_radius {
        Some(r) if r < n.abs_diff(m) => {
            return Err(Error::InfeasibleBand {
                band: r,
                left_len: n,
                right_len: m,
            })
        }
        Some(r) => r,
        None => usize::MAX,
    };

    // Two rolling rows of the cumulative cost matrix, offset by one so that
    // column 0 is the +inf boundary.
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 0..n {
        curr.fill(f64::INFINITY);
        let lo = i.saturating_sub(band);
        let hi = i.saturating_add(band).min(m - 1);
        let fa = a.frame(i);
        for j in lo..=hi {
            let cost = frame_distance(fa, b.frame(j));
            let best = prev[j].min(prev[j + 1]).min(curr[j]);
            curr[j + 1] = cost + best;
        }
        core::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m])
}
