//! Signal conditioning and window extraction for multichannel sensor streams.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::window::Window;

/// Annotated time span in seconds. A zero-length span marks an instant.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSpan {
    pub start_s: f64,
    pub end_s: f64,
    pub label: String,
}

impl EventSpan {
    pub fn new(start_s: f64, end_s: f64, label: impl Into<String>) -> Result<Self> {
        if !(start_s <= end_s) {
            return Err(Error::InvalidParameter(alloc::format!(
                "event span start {start_s} after end {end_s}"
            )));
        }
        Ok(Self {
            start_s,
            end_s,
            label: label.into(),
        })
    }

    pub fn midpoint_s(&self) -> f64 {
        0.5 * (self.start_s + self.end_s)
    }

    /// Spans are half-open `[start, end)`; a zero-length span is the single
    /// instant `start` and intersects any span containing it.
    pub fn intersects(&self, other: &EventSpan) -> bool {
        let point = |s: &EventSpan, t: f64| s.start_s <= t && (t < s.end_s || s.start_s == s.end_s && t == s.start_s);
        if self.start_s == self.end_s {
            return point(other, self.start_s);
        }
        if other.start_s == other.end_s {
            return point(self, other.start_s);
        }
        self.start_s.max(other.start_s) < self.end_s.min(other.end_s)
    }
}

/// A variable-length recording. `data` holds `T` frames of `D` channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSession {
    pub data: Window,
    pub sample_rate_hz: f64,
    pub channel_names: Vec<String>,
    pub annotations: Vec<EventSpan>,
}

impl SensorSession {
    pub fn new(
        data: Window,
        sample_rate_hz: f64,
        channel_names: Vec<String>,
        annotations: Vec<EventSpan>,
    ) -> Result<Self> {
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        if channel_names.len() != data.channels() {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} channel names for {} channels",
                channel_names.len(),
                data.channels()
            )));
        }
        let duration = data.len() as f64 / sample_rate_hz;
        for a in &annotations {
            if a.start_s < 0.0 || a.end_s > duration {
                return Err(Error::InvalidParameter(alloc::format!(
                    "annotation [{}, {}] outside session of {duration} s",
                    a.start_s,
                    a.end_s
                )));
            }
        }
        let data = data.with_sample_rate(sample_rate_hz);
        Ok(Self {
            data,
            sample_rate_hz,
            channel_names,
            annotations,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }

    fn with_data(&self, data: Window) -> Self {
        Self {
            data: data.with_sample_rate(self.sample_rate_hz),
            sample_rate_hz: self.sample_rate_hz,
            channel_names: self.channel_names.clone(),
            annotations: self.annotations.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub moving_average_window: usize,
    pub highpass_cutoff_hz: f64,
    pub highpass_order: usize,
}

impl Default for FilterSpec {
    /// Moving average over 10 samples, then a 2nd-order high-pass at 1.5 Hz
    /// (a cutoff of 3π rad/s).
    fn default() -> Self {
        Self {
            moving_average_window: 10,
            highpass_cutoff_hz: 1.5,
            highpass_order: 2,
        }
    }
}

impl FilterSpec {
    /// Moving average followed by the Butterworth high-pass.
    pub fn apply(&self, session: &SensorSession) -> Result<SensorSession> {
        let smoothed = moving_average(session, self.moving_average_window)?;
        butterworth_highpass(&smoothed, self)
    }
}

/// Causal trailing mean per channel. The first `window - 1` outputs average
/// the available prefix.
pub fn moving_average(session: &SensorSession, window: usize) -> Result<SensorSession> {
    if window == 0 || window > session.len() {
        return Err(Error::InvalidParameter(alloc::format!(
            "moving average window {window} must be in 1..={}",
            session.len()
        )));
    }
    let (t_len, d) = session.data.shape();
    let src = session.data.values();
    let mut out = vec![0.0; t_len * d];
    for c in 0..d {
        let mut sum = 0.0;
        for t in 0..t_len {
            sum += src[t * d + c];
            if t >= window {
                sum -= src[(t - window) * d + c];
            }
            let n = (t + 1).min(window);
            out[t * d + c] = sum / n as f64;
        }
    }
    Ok(session.with_data(Window::from_row_major(out, t_len, d)?))
}

/// One second-order (or first-order, with `b2 = a2 = 0`) section, with `a0`
/// normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    /// Runs the section over `x` in direct form II transposed, from rest.
    fn filter(&self, x: &mut [f64]) {
        let (mut z1, mut z2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b[0] * input + z1;
            z1 = self.b[1] * input - self.a[0] * y + z2;
            z2 = self.b[2] * input - self.a[1] * y;
            *v = y;
        }
    }
}

/// Digital Butterworth high-pass as a cascade of sections, designed by the
/// bilinear transform with frequency prewarping.
pub fn butterworth_highpass_design(cutoff_hz: f64, order: usize, sample_rate_hz: f64) -> Result<Vec<Biquad>> {
    if order == 0 {
        return Err(Error::InvalidParameter("filter order must be >= 1".into()));
    }
    if !(cutoff_hz > 0.0 && cutoff_hz < 0.5 * sample_rate_hz) {
        return Err(Error::InvalidParameter(alloc::format!(
            "cutoff {cutoff_hz} Hz must lie in (0, {}) Hz",
            0.5 * sample_rate_hz
        )));
    }
    let w = libm::tan(PI * cutoff_hz / sample_rate_hz);
    let mut sections = Vec::with_capacity(order.div_ceil(2));
    for k in 0..order / 2 {
        // Damping of the k-th conjugate pole pair of the analog prototype.
        let damping = 2.0 * libm::sin(PI * (2 * k + 1) as f64 / (2 * order) as f64);
        let a0 = 1.0 + damping * w + w * w;
        sections.push(Biquad {
            b: [1.0 / a0, -2.0 / a0, 1.0 / a0],
            a: [(2.0 * w * w - 2.0) / a0, (1.0 - damping * w + w * w) / a0],
        });
    }
    if order % 2 == 1 {
        let a0 = 1.0 + w;
        sections.push(Biquad {
            b: [1.0 / a0, -1.0 / a0, 0.0],
            a: [(w - 1.0) / a0, 0.0],
        });
    }
    Ok(sections)
}

/// Per-channel causal Butterworth high-pass.
pub fn butterworth_highpass(session: &SensorSession, spec: &FilterSpec) -> Result<SensorSession> {
    let sections = butterworth_highpass_design(spec.highpass_cutoff_hz, spec.highpass_order, session.sample_rate_hz)?;
    let (t_len, d) = session.data.shape();
    let mut out = session.data.values().to_vec();
    let mut column = vec![0.0; t_len];
    for c in 0..d {
        for (t, v) in column.iter_mut().enumerate() {
            *v = out[t * d + c];
        }
        for s in &sections {
            s.filter(&mut column);
        }
        for (t, v) in column.iter().enumerate() {
            out[t * d + c] = *v;
        }
    }
    Ok(session.with_data(Window::from_row_major(out, t_len, d)?))
}

/// Keeps the named channels, in the requested order.
pub fn select_channels<S: AsRef<str>>(session: &SensorSession, names: &[S]) -> Result<SensorSession> {
    if names.is_empty() {
        return Err(Error::Empty("channel list"));
    }
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            session
                .channel_names
                .iter()
                .position(|c| c == n.as_ref())
                .ok_or_else(|| Error::UnknownChannel(n.as_ref().into()))
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(session.len() * idx.len());
    for frame in session.data.frames() {
        values.extend(idx.iter().map(|&i| frame[i]));
    }
    Ok(SensorSession {
        data: Window::from_row_major(values, session.len(), idx.len())?.with_sample_rate(session.sample_rate_hz),
        sample_rate_hz: session.sample_rate_hz,
        channel_names: names.iter().map(|n| n.as_ref().into()).collect(),
        annotations: session.annotations.clone(),
    })
}

/// Window length in samples; `window_s * fs` must be a positive integer.
pub fn window_samples(window_s: f64, sample_rate_hz: f64) -> Result<usize> {
    let exact = window_s * sample_rate_hz;
    let n = libm::round(exact);
    if n < 1.0 || libm::fabs(exact - n) > 1e-6 {
        return Err(Error::InvalidParameter(alloc::format!(
            "{window_s} s at {sample_rate_hz} Hz is not a whole number of samples"
        )));
    }
    Ok(n as usize)
}

/// Copies `len` frames starting at `start`.
pub fn slice_frames(data: &Window, start: usize, len: usize) -> Result<Window> {
    let d = data.channels();
    let w = Window::from_row_major(data.values()[start * d..(start + len) * d].to_vec(), len, d)?;
    Ok(match data.sample_rate_hz() {
        Some(hz) => w.with_sample_rate(hz),
        None => w,
    })
}

/// First sample of the window centered on each `label` annotation, shifted
/// inward where the window would cross a session boundary.
pub fn event_window_starts(session: &SensorSession, label: &str, window_s: f64) -> Result<Vec<usize>> {
    let n = window_samples(window_s, session.sample_rate_hz)?;
    if n > session.len() {
        return Err(Error::WindowTooLong {
            window: n,
            available: session.len(),
        });
    }
    let max_start = (session.len() - n) as i64;
    Ok(session
        .annotations
        .iter()
        .filter(|a| a.label == label)
        .map(|a| {
            let center = libm::round(a.midpoint_s() * session.sample_rate_hz) as i64;
            (center - (n / 2) as i64).clamp(0, max_start) as usize
        })
        .collect())
}

/// One window per `label` annotation, centered on the span midpoint.
pub fn extract_event_windows(session: &SensorSession, label: &str, window_s: f64) -> Result<Vec<Window>> {
    let n = window_samples(window_s, session.sample_rate_hz)?;
    event_window_starts(session, label, window_s)?
        .into_iter()
        .map(|s| slice_frames(&session.data, s, n))
        .collect()
}

/// Sliding windows at a constant step of `round(stride_s * fs)` samples. The
/// last window is the final one fully inside the session.
pub fn slide_windows(session: &SensorSession, window_s: f64, stride_s: f64) -> Result<Vec<(usize, Window)>> {
    let n = window_samples(window_s, session.sample_rate_hz)?;
    let step = libm::round(stride_s * session.sample_rate_hz);
    if !(stride_s > 0.0) || step < 1.0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "stride {stride_s} s is shorter than one sample"
        )));
    }
    let step = step as usize;
    if n > session.len() {
        return Err(Error::WindowTooLong {
            window: n,
            available: session.len(),
        });
    }
    (0..=session.len() - n)
        .step_by(step)
        .map(|s| Ok((s, slice_frames(&session.data, s, n)?)))
        .collect()
}
