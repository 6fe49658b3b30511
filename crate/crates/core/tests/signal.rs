use std::f64::consts::PI;

use mcc_core::augment::{augment_4x, jitter, warp_envelope, AugmentConfig};
use mcc_core::preprocess::{
    butterworth_highpass, event_window_starts, extract_event_windows, moving_average, select_channels,
    slide_windows, EventSpan, FilterSpec, SensorSession,
};
use mcc_core::Window;

fn mono(values: Vec<f64>, fs: f64) -> SensorSession {
    let n = values.len();
    SensorSession::new(Window::from_row_major(values, n, 1).unwrap(), fs, vec!["x".into()], vec![]).unwrap()
}

fn analytic_db(f: f64, fc: f64, fs: f64, order: i32) -> f64 {
    let ratio = (PI * fc / fs).tan() / (PI * f / fs).tan();
    -10.0 * (1.0 + ratio.powi(2 * order)).log10()
}

/// Amplitude of the `f` Hz component over the tail, by projection on sin/cos
/// across a whole number of periods.
fn tail_amplitude(y: &[f64], f: f64, fs: f64, periods: usize) -> f64 {
    let n = (periods as f64 * fs / f).round() as usize;
    let tail = &y[y.len() - n..];
    let t0 = y.len() - n;
    let (mut s, mut c) = (0.0, 0.0);
    for (k, v) in tail.iter().enumerate() {
        let phase = 2.0 * PI * f * (t0 + k) as f64 / fs;
        s += v * phase.sin();
        c += v * phase.cos();
    }
    2.0 * (s * s + c * c).sqrt() / n as f64
}

fn highpass_response_db(f: f64, order: usize, seconds: f64) -> f64 {
    let fs = 50.0;
    let n = (seconds * fs) as usize;
    let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * f * t as f64 / fs).sin()).collect();
    let spec = FilterSpec {
        highpass_order: order,
        ..FilterSpec::default()
    };
    let y = butterworth_highpass(&mono(x, fs), &spec).unwrap();
    20.0 * tail_amplitude(y.data.values(), f, fs, 5).log10()
}

#[test]
fn highpass_matches_analytic_magnitude() {
    for order in [1usize, 2, 3, 4] {
        for f in [0.5, 1.0, 1.5, 3.0, 10.0] {
            let measured = highpass_response_db(f, order, 60.0);
            let want = analytic_db(f, 1.5, 50.0, order as i32);
            assert!((measured - want).abs() <= 1.0, "order {order}, {f} Hz: {measured:.3} dB vs {want:.3} dB");
        }
    }
}

#[test]
fn highpass_suppresses_slow_drift() {
    let db = highpass_response_db(0.2, 2, 200.0);
    assert!(db <= -30.0, "{db} dB");
}

#[test]
fn moving_average_ramp_and_identity() {
    let ramp = mono((0..10).map(f64::from).collect(), 50.0);
    let out = moving_average(&ramp, 10).unwrap();
    assert_eq!(*out.data.values().last().unwrap(), 4.5);
    assert_eq!(moving_average(&ramp, 1).unwrap().data, ramp.data);
    let flat = mono(vec![2.5; 30], 50.0);
    assert_eq!(moving_average(&flat, 10).unwrap().data, flat.data);
}

fn xyz_session(annotations: Vec<EventSpan>) -> SensorSession {
    let t = 500;
    let values: Vec<f64> = (0..t * 3).map(|i| (i as f64 * 0.37).sin() + (i % 3) as f64).collect();
    SensorSession::new(
        Window::from_row_major(values, t, 3).unwrap(),
        50.0,
        ["x", "y", "z"].map(String::from).to_vec(),
        annotations,
    )
    .unwrap()
}

#[test]
fn channel_permutation_elementwise() {
    let s = xyz_session(vec![]);
    let swapped = select_channels(&s, &["y", "x"]).unwrap();
    assert_eq!(swapped.channel_names, vec!["y", "x"]);
    for t in 0..s.len() {
        assert_eq!(swapped.data.get(t, 0), s.data.get(t, 1));
        assert_eq!(swapped.data.get(t, 1), s.data.get(t, 0));
    }
    assert_eq!(select_channels(&s, &["x", "y", "z"]).unwrap(), s);
    assert_eq!(select_channels(&s, &["x", "y"]).unwrap().data.channels(), 2);
    assert!(select_channels(&s, &["w"]).is_err());
}

#[test]
fn event_windows_follow_boundary_rule() {
    let s = xyz_session(vec![
        EventSpan::new(4.9, 5.1, "cough").unwrap(),
        EventSpan::new(0.0, 0.1, "cough").unwrap(),
        EventSpan::new(3.0, 3.2, "talk").unwrap(),
    ]);
    let w = extract_event_windows(&s, "cough", 0.4).unwrap();
    assert_eq!(w.len(), 2);
    assert_eq!(w[0].shape(), (20, 3));
    // Midpoint sample 250 minus half a window; 0.05 s clamps to zero.
    assert_eq!(event_window_starts(&s, "cough", 0.4).unwrap(), vec![240, 0]);
    assert_eq!(w[1].frame(0), s.data.frame(0));
    assert!(extract_event_windows(&s, "sneeze", 0.4).unwrap().is_empty());
}

#[test]
fn sliding_counts() {
    let s = xyz_session(vec![]);
    assert_eq!(slide_windows(&s, 0.4, 0.1).unwrap().len(), (500 - 20) / 5 + 1);
    assert_eq!(slide_windows(&s, 0.4, 0.02).unwrap().len(), 481);
    assert_eq!(slide_windows(&s, 10.0, 0.1).unwrap().len(), 1);
    assert!(slide_windows(&s, 10.02, 0.1).is_err());
}

/// Natural cubic spline solved as a dense system on the per-segment
/// polynomial coefficients `y = a + b u + c u^2 + d u^3`, `u = x - x_i`.
fn spline_oracle(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let segs = xs.len() - 1;
    let n = 4 * segs;
    let mut m = vec![vec![0.0; n + 1]; n];
    let mut row = 0;
    let put = |m: &mut Vec<Vec<f64>>, row: usize, seg: usize, coeffs: [f64; 4], rhs: f64| {
        for (k, c) in coeffs.iter().enumerate() {
            m[row][4 * seg + k] += c;
        }
        m[row][n] = rhs;
    };
    for s in 0..segs {
        let h = xs[s + 1] - xs[s];
        put(&mut m, row, s, [1.0, 0.0, 0.0, 0.0], ys[s]);
        row += 1;
        put(&mut m, row, s, [1.0, h, h * h, h * h * h], ys[s + 1]);
        row += 1;
        if s + 1 < segs {
            put(&mut m, row, s, [0.0, 1.0, 2.0 * h, 3.0 * h * h], 0.0);
            put(&mut m, row, s + 1, [0.0, -1.0, 0.0, 0.0], 0.0);
            row += 1;
            put(&mut m, row, s, [0.0, 0.0, 2.0, 6.0 * h], 0.0);
            put(&mut m, row, s + 1, [0.0, 0.0, -2.0, 0.0], 0.0);
            row += 1;
        }
    }
    put(&mut m, row, 0, [0.0, 0.0, 2.0, 0.0], 0.0);
    row += 1;
    let h = xs[segs] - xs[segs - 1];
    put(&mut m, row, segs - 1, [0.0, 0.0, 2.0, 6.0 * h], 0.0);

    // Gauss-Jordan with partial pivoting.
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for k in col..=n {
                        m[r][k] -= f * m[col][k];
                    }
                }
            }
        }
    }
    let coef: Vec<f64> = (0..n).map(|i| m[i][n] / m[i][i]).collect();
    let s = (0..segs).rfind(|&s| xs[s] <= x).unwrap_or(0);
    let u = x - xs[s];
    coef[4 * s] + coef[4 * s + 1] * u + coef[4 * s + 2] * u * u + coef[4 * s + 3] * u * u * u
}

#[test]
fn warp_envelope_is_natural_spline() {
    for knots in [vec![1.0, 1.3, 0.7, 1.1], vec![0.8, 1.2, 1.0, 0.9, 1.4, 1.05], vec![1.2, 0.6, 1.0]] {
        let len = 40;
        let env = warp_envelope(&knots, len).unwrap();
        let step = (len - 1) as f64 / (knots.len() - 1) as f64;
        let xs: Vec<f64> = (0..knots.len()).map(|i| i as f64 * step).collect();
        for t in [1, 4, 7, 11, 16, 20, 25, 29, 33, 38] {
            let want = spline_oracle(&xs, &knots, t as f64);
            assert!((env[t] - want).abs() <= 1e-9, "t={t}: {} vs {want}", env[t]);
        }
    }
}

#[test]
fn jitter_noise_has_configured_std() {
    let n = 20_000;
    let frames: Vec<[f64; 2]> = (0..n).map(|t| [if t % 2 == 0 { 1.0 } else { -1.0 }, 3.0 * (t % 2) as f64]).collect();
    let w = Window::from_frames(&frames).unwrap();
    let cfg = AugmentConfig {
        jitter_sigma: 0.5,
        rng_seed: 4,
        ..AugmentConfig::default()
    };
    let out = jitter(&w, &cfg).unwrap();
    // Channel stds are 1 and 1.5.
    for (d, channel_std) in [(0usize, 1.0), (1, 1.5)] {
        let noise: Vec<f64> = (0..n).map(|t| out.get(t, d) - w.get(t, d)).collect();
        let mean = noise.iter().sum::<f64>() / n as f64;
        let std = (noise.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        let expected = 0.5 * channel_std;
        assert!(mean.abs() < 4.0 * expected / (n as f64).sqrt());
        assert!((std / expected - 1.0).abs() < 4.0 / (2.0 * n as f64).sqrt(), "{std} vs {expected}");
    }
}

fn fnv1a(values: impl Iterator<Item = f64>) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

#[test]
fn augment_4x_golden_digest() {
    let originals: Vec<Window> = (0..3)
        .map(|k| {
            let frames: Vec<[f64; 2]> = (0..20)
                .map(|t| [(t as f64 * 0.3 + k as f64).sin(), (t as f64 * 0.1).cos() * (k + 1) as f64])
                .collect();
            Window::from_frames(&frames).unwrap()
        })
        .collect();
    let cfg = AugmentConfig {
        rng_seed: 2024,
        ..AugmentConfig::default()
    };
    let out = augment_4x(&originals, &cfg).unwrap();
    assert_eq!(out.len(), 12);
    assert_eq!(&out[..3], &originals[..]);
    assert!(augment_4x(&[], &cfg).unwrap().is_empty());
    let digest = fnv1a(out.iter().flat_map(|w| w.values().iter().copied()));
    assert_eq!(digest, GOLDEN_AUGMENT_DIGEST, "digest {digest:#018x}");
}

const GOLDEN_AUGMENT_DIGEST: u64 = 0xc4862520dc938f7a;
