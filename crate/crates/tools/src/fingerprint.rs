//! Preprocessing fingerprints: `<variant>/sha256:<hex>` over a canonical JSON
//! record of everything that shapes a model's input windows.

use mcc_core::mcc::Variant;
use mcc_core::pipeline::PipelineConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Result, ToolError};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "input", rename_all = "snake_case")]
pub enum Preprocessing {
    /// Ready-made windows (samples.csv or UCR files) used as-is.
    Windows,
    /// Sensor sessions through channel selection, filters and windowing.
    Sessions {
        channels: Vec<String>,
        moving_average_window: usize,
        highpass_cutoff_hz: f64,
        highpass_order: usize,
        window_s: f64,
    },
}

impl Preprocessing {
    pub fn from_pipeline(cfg: &PipelineConfig) -> Self {
        Preprocessing::Sessions {
            channels: cfg.channels.clone(),
            moving_average_window: cfg.filter.moving_average_window,
            highpass_cutoff_hz: cfg.filter.highpass_cutoff_hz,
            highpass_order: cfg.filter.highpass_order,
            window_s: cfg.window_s,
        }
    }

    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("plain record");
        let hash = Sha256::digest(&canonical);
        let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }

    pub fn fingerprint(&self, variant: Variant) -> String {
        format!("{}/{}", variant.name(), self.digest())
    }

    /// Refuses a model trained under different preprocessing.
    pub fn check(&self, fingerprint: &str) -> Result<()> {
        let recorded = fingerprint.split_once('/').map_or(fingerprint, |(_, d)| d);
        if recorded == self.digest() {
            Ok(())
        } else {
            Err(ToolError::Config(format!(
                "model preprocessing fingerprint {fingerprint} does not match this run ({})",
                self.digest()
            )))
        }
    }
}

/// Variant named in a fingerprint, if any.
pub fn variant_of(fingerprint: &str) -> Option<Variant> {
    match fingerprint.split_once('/')?.0 {
        "improved" => Some(Variant::Improved),
        "original" => Some(Variant::Original),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_tracks_every_field() {
        let base = Preprocessing::from_pipeline(&PipelineConfig::default());
        let mut cfg = PipelineConfig::default();
        cfg.filter.highpass_order = 3;
        let other = Preprocessing::from_pipeline(&cfg);
        assert_ne!(base.digest(), other.digest());
        assert_eq!(base.digest(), Preprocessing::from_pipeline(&PipelineConfig::default()).digest());
        assert_ne!(base.digest(), Preprocessing::Windows.digest());
    }

    #[test]
    fn check_ignores_variant_but_not_digest() {
        let p = Preprocessing::Windows;
        let fp = p.fingerprint(Variant::Original);
        assert!(fp.starts_with("original/sha256:"));
        assert_eq!(variant_of(&fp), Some(Variant::Original));
        p.check(&fp).unwrap();
        let err = Preprocessing::from_pipeline(&PipelineConfig::default()).check(&fp).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
