//! Speech-spectrum augmentation: LPC segmental warping, formant-energy
//! perturbation, VTLP baseline, log-mel features and a corpus pipeline.

pub mod augment;
pub mod features;
pub mod lpc;
pub mod pipeline;
pub mod seed;
pub mod signal_io;
pub mod spectrum;

pub use spectrum::SpectralEnvelope;
