//! Segmental spectrum warping and formant-energy perturbation.
//!
//! Per frame: LPC envelope → valley segments → warp map built from the
//! drawn factors → warped envelope → per-segment energy scaling →
//! envelope × residual. The VTLP baseline skips LPC and warps the raw FFT
//! magnitude through a single-segment map.

pub mod preset;
pub mod segments;
pub mod warp;

use thiserror::Error;

pub use preset::{
    draw_factors, AlphaSpec, FactorRange, Preset, PresetName, WarpFactors, WarpTarget,
};
pub use segments::{detect_segments, SegmentMap};
pub use warp::{apply_fep, apply_warp, build_warp_map, reconstruct_spectrum, WarpMap};

use crate::lpc::{self, LpcError, LpcModel, Spectrum};
use crate::spectrum::SpectralEnvelope;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid segment map: {0}")]
    BadSegments(String),
    #[error("warp factor {0} must be positive and finite")]
    BadFactor(f64),
    #[error("spectrum has {got} bins, expected {expected}")]
    BinMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Lpc(#[from] LpcError),
}

/// Every intermediate of one frame's augmentation.
#[derive(Debug, Clone)]
pub struct FrameTrace {
    pub raw: SpectralEnvelope,
    /// The LPC model could not be estimated; `output` is the raw magnitude.
    pub degenerate: bool,
    pub model: Option<LpcModel>,
    pub envelope: Option<SpectralEnvelope>,
    pub residual: Option<Vec<f64>>,
    pub segments: Option<SegmentMap>,
    pub map: Option<WarpMap>,
    pub warped: Option<SpectralEnvelope>,
    pub perturbed: Option<SpectralEnvelope>,
    pub output: Vec<f64>,
}

impl FrameTrace {
    fn passthrough(raw: SpectralEnvelope, degenerate: bool) -> Self {
        Self {
            output: raw.magnitudes.clone(),
            raw,
            degenerate,
            model: None,
            envelope: None,
            residual: None,
            segments: None,
            map: None,
            warped: None,
            perturbed: None,
        }
    }
}

/// Applies one preset to frames of a fixed size and rate.
#[derive(Debug, Clone)]
pub struct FrameAugmenter {
    preset: Preset,
    lpc_order: usize,
    sample_rate: u32,
    max_segments: usize,
    spectrum: Spectrum,
}

impl FrameAugmenter {
    pub fn new(
        preset: Preset,
        lpc_order: usize,
        fft_size: usize,
        sample_rate: u32,
    ) -> Result<Self, AugmentError> {
        if !fft_size.is_power_of_two() || fft_size < 2 * lpc_order.max(1) {
            return Err(LpcError::BadFftSize {
                fft_size,
                min: 2 * lpc_order,
            }
            .into());
        }
        Ok(Self {
            preset,
            lpc_order,
            sample_rate,
            max_segments: preset::MAX_SEGMENTS,
            spectrum: Spectrum::new(fft_size),
        })
    }

    pub fn preset(&self) -> &Preset {
        &self.preset
    }

    pub fn nyquist_hz(&self) -> f64 {
        f64::from(self.sample_rate) / 2.0
    }

    /// Plain magnitude spectrum of a frame on this augmenter's grid.
    pub fn magnitude(&self, frame: &[f64]) -> Result<SpectralEnvelope, AugmentError> {
        Ok(SpectralEnvelope::new(
            self.spectrum.magnitude(frame)?,
            self.sample_rate,
        ))
    }

    pub fn trace(&self, frame: &[f64], factors: &WarpFactors) -> Result<FrameTrace, AugmentError> {
        let raw = self.magnitude(frame)?;
        match self.preset.target {
            WarpTarget::RawSpectrum => self.trace_raw(raw, factors),
            WarpTarget::LpcEnvelope => self.trace_lpc(frame, raw, factors),
        }
    }

    /// Modified magnitude spectrum and whether the frame was passed through.
    pub fn process(
        &self,
        frame: &[f64],
        factors: &WarpFactors,
    ) -> Result<(Vec<f64>, bool), AugmentError> {
        let t = self.trace(frame, factors)?;
        Ok((t.output, t.degenerate))
    }

    fn trace_raw(
        &self,
        raw: SpectralEnvelope,
        factors: &WarpFactors,
    ) -> Result<FrameTrace, AugmentError> {
        let segments = SegmentMap::single(preset::VTLP_F_HI_FRACTION * raw.nyquist_hz);
        let map = build_warp_map(&segments, factors, raw.nyquist_hz)?;
        let warped = apply_warp(&raw, &map);
        let perturbed = self
            .preset
            .has_energy_perturbation()
            .then(|| apply_fep(&warped, &segments, &map, factors));
        let output = perturbed.as_ref().unwrap_or(&warped).magnitudes.clone();
        Ok(FrameTrace {
            segments: Some(segments),
            map: Some(map),
            warped: Some(warped),
            perturbed,
            output,
            ..FrameTrace::passthrough(raw, false)
        })
    }

    fn trace_lpc(
        &self,
        frame: &[f64],
        raw: SpectralEnvelope,
        factors: &WarpFactors,
    ) -> Result<FrameTrace, AugmentError> {
        let model = match lpc::analyze_frame(frame, self.lpc_order, 0) {
            Ok(m) => m,
            Err(LpcError::Degenerate | LpcError::IllConditioned { .. }) => {
                return Ok(FrameTrace::passthrough(raw, true))
            }
            Err(e) => return Err(e.into()),
        };
        let envelope = lpc::envelope_with(&model, &self.spectrum, self.sample_rate)?;
        let residual = lpc::residual_from_magnitude(&raw.magnitudes, &envelope)?;
        let segments = segments::detect_segments(&envelope, self.max_segments);
        let map = build_warp_map(&segments, factors, envelope.nyquist_hz)?;
        let warped = apply_warp(&envelope, &map);
        let perturbed = self
            .preset
            .has_energy_perturbation()
            .then(|| apply_fep(&warped, &segments, &map, factors));
        let output = reconstruct_spectrum(perturbed.as_ref().unwrap_or(&warped), &residual)?;
        Ok(FrameTrace {
            model: Some(model),
            envelope: Some(envelope),
            residual: Some(residual),
            segments: Some(segments),
            map: Some(map),
            warped: Some(warped),
            perturbed,
            output,
            ..FrameTrace::passthrough(raw, false)
        })
    }
}
