use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Fixed-length multichannel segment stored row-major: `len` frames of
/// `channels` values each.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    values: Vec<f64>,
    len: usize,
    channels: usize,
    sample_rate_hz: Option<f64>,
}

impl Window {
    /// Builds a window from row-major values (frame by frame).
    pub fn from_row_major(values: Vec<f64>, len: usize, channels: usize) -> Result<Self> {
        if len == 0 || channels == 0 {
            return Err(Error::Empty("window"));
        }
        if values.len() != len * channels {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} values cannot fill a {}x{} window",
                values.len(),
                len,
                channels
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("window values must be finite".into()));
        }
        Ok(Self {
            values,
            len,
            channels,
            sample_rate_hz: None,
        })
    }

    /// Builds a window from a list of frames.
    pub fn from_frames<F: AsRef<[f64]>>(frames: &[F]) -> Result<Self> {
        let channels = frames.first().map(|f| f.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(frames.len() * channels);
        for frame in frames {
            let frame = frame.as_ref();
            if frame.len() != channels {
                return Err(Error::InvalidParameter("ragged frames".into()));
            }
            values.extend_from_slice(frame);
        }
        Self::from_row_major(values, frames.len(), channels)
    }

    /// Single-channel window.
    pub fn from_series(series: &[f64]) -> Result<Self> {
        Self::from_row_major(series.to_vec(), series.len(), 1)
    }

    /// A single frame, used for non-temporal feature vectors (e.g. 2-D points).
    pub fn point(coords: &[f64]) -> Result<Self> {
        Self::from_row_major(coords.to_vec(), 1, coords.len())
    }

    pub fn with_sample_rate(mut self, hz: f64) -> Self {
        self.sample_rate_hz = Some(hz);
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.len, self.channels)
    }

    pub fn sample_rate_hz(&self) -> Option<f64> {
        self.sample_rate_hz
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.values[t * self.channels..(t + 1) * self.channels]
    }

    pub fn get(&self, t: usize, d: usize) -> f64 {
        self.values[t * self.channels + d]
    }

    pub fn frames(&self) -> core::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.channels)
    }

    /// Values of channel `d` in time order.
    pub fn channel(&self, d: usize) -> impl Iterator<Item = f64> + '_ {
        self.frames().map(move |f| f[d])
    }

    /// Applies `f(t, d, value)` to every entry, keeping the shape.
    pub fn map_indexed(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        let channels = self.channels;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(i / channels, i % channels, v))
            .collect();
        Self {
            values,
            len: self.len,
            channels,
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// Elementwise mean of equally shaped windows.
    pub fn mean_of<'a>(windows: impl IntoIterator<Item = &'a Window>) -> Result<Window> {
        let mut iter = windows.into_iter();
        let first = iter.next().ok_or(Error::Empty("window list"))?;
        let mut sum = first.values.clone();
        let mut count = 1usize;
        for w in iter {
            if w.shape() != first.shape() {
                return Err(shape_mismatch(first, w));
            }
            for (s, v) in sum.iter_mut().zip(&w.values) {
                *s += v;
            }
            count += 1;
        }
        let n = count as f64;
        sum.iter_mut().for_each(|s| *s /= n);
        Ok(Window {
            values: sum,
            len: first.len,
            channels: first.channels,
            sample_rate_hz: first.sample_rate_hz,
        })
    }
}

pub(crate) fn shape_mismatch(a: &Window, b: &Window) -> Error {
    Error::ShapeMismatch {
        left_len: a.len,
        left_channels: a.channels,
        right_len: b.len,
        right_channels: b.channels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Window::from_row_major(vec![], 0, 1).is_err());
        assert!(Window::from_row_major(vec![1.0, 2.0, 3.0], 2, 2).is_err());
        assert!(Window::from_row_major(vec![f64::NAN], 1, 1).is_err());
        assert!(Window::from_frames(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn frames_and_channels() {
        let w = Window::from_frames(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        assert_eq!(w.shape(), (3, 2));
        assert_eq!(w.frame(1), &[3.0, 4.0]);
        assert_eq!(w.channel(1).collect::<Vec<_>>(), vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn mean_of_windows() {
        let a = Window::from_series(&[0.0, 2.0]).unwrap();
        let b = Window::from_series(&[2.0, 4.0]).unwrap();
        assert_eq!(Window::mean_of([&a, &b]).unwrap().values(), &[1.0, 3.0]);
        let c = Window::from_series(&[1.0]).unwrap();
        assert!(Window::mean_of([&a, &c]).is_err());
    }
}
