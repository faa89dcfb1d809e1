use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::augment::PresetName;
use crate::features::MaskSpec;
use crate::signal_io::frame_geometry;

/// Whether one factor vector is drawn per utterance or per frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorGranularity {
    #[default]
    PerUtterance,
    PerFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub preset_name: PresetName,
    pub sample_rate: u32,
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub lpc_order: usize,
    pub fft_size: usize,
    pub n_mel: usize,
    pub factor_granularity: FactorGranularity,
    pub mask: MaskSpec,
    /// Apply `mask` to augmented copies.
    pub spec_augment: bool,
    /// `None` disables pre-emphasis.
    pub pre_emphasis: Option<f64>,
    pub global_seed: u64,
    pub augment_copies: usize,
    /// Worker threads; 1 runs serially.
    pub jobs: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            preset_name: PresetName::LpcSwpExp3Fep,
            sample_rate: 16000,
            frame_ms: 25.0,
            hop_ms: 10.0,
            lpc_order: 18,
            fft_size: 512,
            n_mel: 80,
            factor_granularity: FactorGranularity::PerUtterance,
            mask: MaskSpec::default(),
            spec_augment: true,
            pre_emphasis: Some(0.97),
            global_seed: 0,
            augment_copies: 1,
            jobs: 1,
        }
    }
}

impl AugmentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn frame_len(&self) -> usize {
        frame_geometry(self.sample_rate, self.frame_ms, self.hop_ms).0
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |msg: String| Err(PipelineError::Config(msg));
        if self.sample_rate == 0 {
            return fail("sample_rate must be positive".into());
        }
        if !(self.hop_ms > 0.0 && self.frame_ms >= self.hop_ms && self.frame_ms.is_finite()) {
            return fail(format!(
                "need frame_ms >= hop_ms > 0, got {} / {}",
                self.frame_ms, self.hop_ms
            ));
        }
        let (frame_len, hop) = frame_geometry(self.sample_rate, self.frame_ms, self.hop_ms);
        if frame_len == 0 || hop == 0 {
            return fail("frame or hop rounds to zero samples".into());
        }
        if self.lpc_order == 0 {
            return fail("lpc_order must be positive".into());
        }
        if self.lpc_order >= frame_len {
            return fail(format!(
                "lpc_order {} must be below frame length {frame_len}",
                self.lpc_order
            ));
        }
        if !self.fft_size.is_power_of_two()
            || self.fft_size < frame_len
            || self.fft_size < 2 * self.lpc_order
        {
            return fail(format!(
                "fft_size {} must be a power of two covering the {frame_len}-sample frame and twice the LPC order",
                self.fft_size
            ));
        }
        if self.n_mel == 0 || self.n_bins() < self.n_mel + 2 {
            return fail(format!(
                "n_mel {} does not fit {} bins",
                self.n_mel,
                self.n_bins()
            ));
        }
        if let Some(c) = self.pre_emphasis {
            if !(0.0..1.0).contains(&c) {
                return fail(format!("pre_emphasis {c} outside [0, 1)"));
            }
        }
        if self.jobs == 0 {
            return fail("jobs must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = AugmentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.frame_len(), 400);
        assert_eq!(c.n_bins(), 257);
    }

    #[test]
    fn json_partial_override() {
        let c: AugmentConfig = serde_json::from_str(
            r#"{"preset_name": "vtlp", "global_seed": 7, "factor_granularity": "per-frame"}"#,
        )
        .unwrap();
        assert_eq!(c.preset_name, PresetName::Vtlp);
        assert_eq!(c.global_seed, 7);
        assert_eq!(c.factor_granularity, FactorGranularity::PerFrame);
        assert_eq!(c.lpc_order, 18);
    }

    #[test]
    fn unknown_fields_and_presets_rejected() {
        assert!(serde_json::from_str::<AugmentConfig>(r#"{"presetname": "vtlp"}"#).is_err());
        assert!(serde_json::from_str::<AugmentConfig>(r#"{"preset_name": "warp9"}"#).is_err());
    }

    #[test]
    fn invalid_values() {
        let bad = [
            AugmentConfig {
                hop_ms: 30.0,
                ..Default::default()
            },
            AugmentConfig {
                fft_size: 256,
                ..Default::default()
            },
            AugmentConfig {
                fft_size: 500,
                ..Default::default()
            },
            AugmentConfig {
                lpc_order: 0,
                ..Default::default()
            },
            AugmentConfig {
                n_mel: 300,
                ..Default::default()
            },
            AugmentConfig {
                pre_emphasis: Some(1.0),
                ..Default::default()
            },
            AugmentConfig {
                jobs: 0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
