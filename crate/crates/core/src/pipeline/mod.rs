//! Corpus orchestration: configuration, seeded runs, reports.

pub mod config;
pub mod corpus;
pub mod formant_stats;
pub mod inspect;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{AugmentConfig, FactorGranularity};
pub use corpus::{
    discover, run_augment, run_featurize, CorpusManifest, Extractor, ManifestEntry, Status,
    MANIFEST_FILE,
};
pub use formant_stats::{run_formant_stats, FormantStats, FormantSummary};
pub use inspect::{run_inspect, InspectReport};

use crate::augment::AugmentError;
use crate::features::FeatureError;
use crate::lpc::LpcError;
use crate::signal_io::AudioError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no WAV files under {0}")]
    EmptyInput(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("sample rate {got} Hz does not match configured {expected} Hz")]
    SampleRate { expected: u32, got: u32 },
    #[error("frame {frame_index} out of range ({n_frames} frames)")]
    FrameOutOfRange { frame_index: usize, n_frames: usize },
    #[error("no voiced frames in {0}")]
    NoVoicedFrames(PathBuf),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Lpc(#[from] LpcError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
