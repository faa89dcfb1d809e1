//! Log-mel features, time/frequency masking and the feature archive.

pub mod archive;
pub mod mel;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use archive::{read_features, sidecar_path, write_features};
pub use mel::{apply_filterbank, build_mel_filterbank, MelFilterbank};

use crate::seed::SeedRng;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("invalid filterbank: {n_filters} filters over {n_bins} bins")]
    BadFilterbank { n_filters: usize, n_bins: usize },
    #[error("spectrum has {got} bins, expected {expected}")]
    BinMismatch { expected: usize, got: usize },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt archive header: {0}")]
    CorruptHeader(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad metadata sidecar: {0}")]
    Metadata(#[from] serde_json::Error),
}

/// Provenance recorded next to every archive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FeatureMeta {
    pub source_id: String,
    pub preset_name: String,
    pub rng_seed: u64,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub sample_rate: u32,
    pub frame_ms: f64,
    pub hop_ms: f64,
}

/// Row-major `n_frames x n_filters` log-mel energies.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub n_frames: usize,
    pub n_filters: usize,
    pub values: Vec<f32>,
    pub meta: FeatureMeta,
}

impl FeatureMatrix {
    pub fn from_rows(rows: &[Vec<f64>], n_filters: usize, meta: FeatureMeta) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == n_filters));
        Self {
            n_frames: rows.len(),
            n_filters,
            values: rows.iter().flatten().map(|&v| v as f32).collect(),
            meta,
        }
    }

    pub fn get(&self, frame: usize, filter: usize) -> f32 {
        self.values[frame * self.n_filters + filter]
    }

    pub fn row(&self, frame: usize) -> &[f32] {
        &self.values[frame * self.n_filters..(frame + 1) * self.n_filters]
    }

    pub fn mean(&self) -> f32 {
        if self.values.is_empty() {
            return 0.0;
        }
        (self.values.iter().map(|&v| f64::from(v)).sum::<f64>() / self.values.len() as f64) as f32
    }
}

/// Masking configuration: counts and maximum widths per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaskSpec {
    pub n_freq_masks: usize,
    pub max_freq_width: usize,
    pub n_time_masks: usize,
    pub max_time_width: usize,
}

impl Default for MaskSpec {
    fn default() -> Self {
        Self {
            n_freq_masks: 2,
            max_freq_width: 30,
            n_time_masks: 2,
            max_time_width: 40,
        }
    }
}

impl MaskSpec {
    pub const NONE: MaskSpec = MaskSpec {
        n_freq_masks: 0,
        max_freq_width: 0,
        n_time_masks: 0,
        max_time_width: 0,
    };

    pub fn is_noop(&self) -> bool {
        (self.n_freq_masks == 0 || self.max_freq_width == 0)
            && (self.n_time_masks == 0 || self.max_time_width == 0)
    }
}

/// Frequency- and time-band masking filled with the utterance mean.
///
/// Widths are drawn uniformly from `0..=max_width` (clamped to the axis
/// length) and starts uniformly from the positions where the band fits.
/// All frequency masks are drawn before the time masks.
pub fn spec_augment(features: &FeatureMatrix, mask: &MaskSpec, seed: u64) -> FeatureMatrix {
    let mut out = features.clone();
    if features.values.is_empty() {
        return out;
    }
    let fill = features.mean();
    let mut rng = SeedRng::new(seed);
    let (n_frames, n_filters) = (features.n_frames, features.n_filters);

    for _ in 0..mask.n_freq_masks {
        let width = rng.up_to(mask.max_freq_width.min(n_filters));
        let start = rng.up_to(n_filters - width);
        for frame in 0..n_frames {
            let row = frame * n_filters;
            out.values[row + start..row + start + width].fill(fill);
        }
    }
    for _ in 0..mask.n_time_masks {
        let width = rng.up_to(mask.max_time_width.min(n_frames));
        let start = rng.up_to(n_frames - width);
        out.values[start * n_filters..(start + width) * n_filters].fill(fill);
    }
    out
}
