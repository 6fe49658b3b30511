//! Wall-clock inference timing.

use std::hint::black_box;
use std::time::Instant;

use mcc_core::baselines::NnModel;
use mcc_core::{MccModel, Window};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ToolError};

/// One row of `bench.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub timing_ns_per_inference: f64,
    pub model_bytes: u64,
    pub repetitions: usize,
    pub windows: usize,
}

/// Median over `repetitions` timed passes of the per-window cost of `f`,
/// after one untimed warm-up pass.
pub fn median_ns_per_call<T>(windows: &[Window], repetitions: usize, mut f: impl FnMut(&Window) -> T) -> Result<f64> {
    if repetitions == 0 {
        return Err(ToolError::Config("repetitions must be >= 1".into()));
    }
    if windows.is_empty() {
        return Err(ToolError::Data("no windows to time".into()));
    }
    for w in windows {
        black_box(f(black_box(w)));
    }
    let mut samples: Vec<f64> = (0..repetitions)
        .map(|_| {
            let start = Instant::now();
            for w in windows {
                black_box(f(black_box(w)));
            }
            start.elapsed().as_nanos() as f64 / windows.len() as f64
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    Ok(if samples.len() % 2 == 1 { samples[mid] } else { 0.5 * (samples[mid - 1] + samples[mid]) })
}

pub fn bench_mcc(model: &MccModel, windows: &[Window], top_k: usize, scale: f64, repetitions: usize) -> Result<f64> {
    model.check_operating_point(top_k, scale)?;
    for w in windows {
        model.check_shape(w)?;
    }
    median_ns_per_call(windows, repetitions, |w| model.predict(w, top_k, scale).map(|p| p.positive))
}

pub fn bench_knn(model: &NnModel, windows: &[Window], repetitions: usize) -> Result<f64> {
    median_ns_per_call(windows, repetitions, |w| model.predict(w))
}

pub fn bench_csv(rows: &[BenchRow]) -> Result<Vec<u8>> {
    let mut out = csv::Writer::from_writer(Vec::new());
    for r in rows {
        out.serialize(r).map_err(|e| ToolError::Data(e.to_string()))?;
    }
    out.into_inner().map_err(|e| ToolError::Data(e.to_string()))
}

pub fn parse_bench_csv(bytes: &[u8]) -> Result<Vec<BenchRow>> {
    csv::Reader::from_reader(bytes)
        .deserialize()
        .map(|r| r.map_err(|e| ToolError::Data(format!("bench.csv: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_repetition_is_one_measurement() {
        let w = vec![Window::point(&[1.0]).unwrap()];
        let t = median_ns_per_call(&w, 1, |x| x.get(0, 0) * 2.0).unwrap();
        assert!(t >= 0.0);
        assert!(median_ns_per_call(&w, 0, |x| x.len()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![BenchRow {
            method: "mcc".into(),
            timing_ns_per_inference: 812.5,
            model_bytes: 1024,
            repetitions: 5,
            windows: 30,
        }];
        assert_eq!(parse_bench_csv(&bench_csv(&rows).unwrap()).unwrap(), rows);
    }
}
