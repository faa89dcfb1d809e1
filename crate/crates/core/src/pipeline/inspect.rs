//! Single-frame report with every intermediate spectrum, for plotting.

use std::path::Path;

use serde::Serialize;

use super::corpus::Extractor;
use super::{AugmentConfig, PipelineError};
use crate::augment::segments::{valleys, VALLEY_PROMINENCE_DB};
use crate::lpc::{self, Formant};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormantRow {
    pub frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub magnitude: f64,
}

impl From<Formant> for FormantRow {
    fn from(f: Formant) -> Self {
        Self {
            frequency_hz: f.frequency_hz,
            bandwidth_hz: f.bandwidth_hz,
            magnitude: f.magnitude,
        }
    }
}

/// Per-bin columns are empty when the stage did not run (silent frames,
/// or the LPC stages for the raw-spectrum preset).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InspectReport {
    pub source_id: String,
    pub frame_index: usize,
    pub start_sample: usize,
    pub sample_rate: u32,
    pub preset: String,
    pub seed: u64,
    pub degenerate: bool,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub valleys_hz: Vec<f64>,
    pub boundaries_hz: Vec<f64>,
    pub segment_count: usize,
    pub warp_anchors: Vec<(f64, f64)>,
    pub envelope_peaks_hz: Vec<f64>,
    pub formants: Vec<FormantRow>,
    pub frequency_hz: Vec<f64>,
    pub raw_magnitude: Vec<f64>,
    pub envelope: Vec<f64>,
    pub warped_envelope: Vec<f64>,
    pub fep_envelope: Vec<f64>,
    pub output_magnitude: Vec<f64>,
}

/// Envelope maxima with at least the valley prominence.
fn envelope_peaks(db: &[f64], bin_hz: f64) -> Vec<f64> {
    let flipped: Vec<f64> = db.iter().map(|v| -v).collect();
    valleys(&flipped, VALLEY_PROMINENCE_DB)
        .into_iter()
        .map(|i| i as f64 * bin_hz)
        .collect()
}

pub fn run_inspect(
    config: &AugmentConfig,
    audio_path: &Path,
    frame_index: usize,
    copy_index: u64,
) -> Result<InspectReport, PipelineError> {
    let extractor = Extractor::new(config)?;
    let clip = extractor.load(audio_path)?;
    let frames = extractor.frames(&clip)?;
    let frame = frames
        .get(frame_index)
        .ok_or(PipelineError::FrameOutOfRange {
            frame_index,
            n_frames: frames.len(),
        })?;

    let preset = extractor.augmenter().preset();
    let seed = seed::utterance_seed(config.global_seed, &clip.source_id, copy_index);
    let factors = preset.draw(seed);
    let trace = extractor.augmenter().trace(&frame.samples, &factors)?;

    let k = trace.segments.as_ref().map_or(0, |s| s.segment_count);
    let column =
        |e: Option<&crate::SpectralEnvelope>| e.map(|e| e.magnitudes.clone()).unwrap_or_default();
    let formants = match &trace.model {
        Some(m) => lpc::formants_from_poles(m, config.sample_rate)
            .map(|fs| fs.into_iter().map(FormantRow::from).collect())
            .unwrap_or_default(),
        None => Vec::new(),
    };
    let envelope_peaks_hz = trace
        .envelope
        .as_ref()
        .map(|e| envelope_peaks(&e.to_db(), e.bin_hz))
        .unwrap_or_default();

    Ok(InspectReport {
        source_id: clip.source_id.clone(),
        frame_index,
        start_sample: frame.start_sample,
        sample_rate: config.sample_rate,
        preset: preset.name.to_string(),
        seed,
        degenerate: trace.degenerate,
        alphas: factors.alphas[..k.min(factors.alphas.len())].to_vec(),
        betas: factors.betas[..k.min(factors.betas.len())].to_vec(),
        valleys_hz: trace
            .segments
            .as_ref()
            .map(|s| s.valleys_hz.clone())
            .unwrap_or_default(),
        boundaries_hz: trace
            .segments
            .as_ref()
            .map(|s| s.boundaries_hz.clone())
            .unwrap_or_default(),
        segment_count: k,
        warp_anchors: trace
            .map
            .as_ref()
            .map(|m| m.anchors.clone())
            .unwrap_or_default(),
        envelope_peaks_hz,
        formants,
        frequency_hz: trace.raw.frequencies().collect(),
        raw_magnitude: trace.raw.magnitudes.clone(),
        envelope: column(trace.envelope.as_ref()),
        warped_envelope: column(trace.warped.as_ref()),
        fep_envelope: column(trace.perturbed.as_ref().or(trace.warped.as_ref())),
        output_magnitude: trace.output.clone(),
    })
}

impl InspectReport {
    pub fn to_json(&self) -> Result<String, PipelineError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per bin; missing stages leave empty cells.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), PipelineError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "bin",
            "frequency_hz",
            "raw_magnitude",
            "envelope",
            "warped_envelope",
            "fep_envelope",
            "output_magnitude",
        ])?;
        let cell = |col: &[f64], i: usize| col.get(i).map(|v| v.to_string()).unwrap_or_default();
        for (i, f) in self.frequency_hz.iter().enumerate() {
            w.write_record([
                i.to_string(),
                f.to_string(),
                cell(&self.raw_magnitude, i),
                cell(&self.envelope, i),
                cell(&self.warped_envelope, i),
                cell(&self.fep_envelope, i),
                cell(&self.output_magnitude, i),
            ])?;
        }
        w.flush()
            .map_err(|e| PipelineError::io(Path::new("<csv>"), e))?;
        Ok(())
    }
}
