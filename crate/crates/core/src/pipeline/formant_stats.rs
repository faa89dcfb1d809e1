//! Mean first-three formant frequencies of two corpora and their ratios.

use std::path::Path;

use serde::Serialize;

use super::corpus::{discover, par_map, Extractor};
use super::{AugmentConfig, PipelineError};
use crate::lpc;

/// Frames quieter than this fraction of the utterance's loudest frame are unvoiced.
pub const VOICED_ENERGY_RATIO: f64 = 1e-3;
/// Pole candidates wider than this are not counted as formants.
pub const MAX_FORMANT_BANDWIDTH_HZ: f64 = 400.0;
/// Candidates closer than this to DC or Nyquist are ignored.
pub const EDGE_GUARD_HZ: f64 = 90.0;
pub const N_FORMANTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormantSummary {
    pub mean_hz: [f64; N_FORMANTS],
    pub std_hz: [f64; N_FORMANTS],
    pub voiced_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormantStats {
    pub corpus_a: FormantSummary,
    pub corpus_b: FormantSummary,
    /// `corpus_b.mean / corpus_a.mean` per formant.
    pub ratio: [f64; N_FORMANTS],
}

/// First three formants of every voiced frame of one clip.
fn clip_formants(
    extractor: &Extractor,
    path: &Path,
) -> Result<Vec<[f64; N_FORMANTS]>, PipelineError> {
    let config = extractor.config();
    let clip = extractor.load(path)?;
    let frames = extractor.frames(&clip)?;
    let energy: Vec<f64> = frames
        .iter()
        .map(|f| f.samples.iter().map(|x| x * x).sum())
        .collect();
    let loudest = energy.iter().copied().fold(0.0, f64::max);
    let nyquist = f64::from(config.sample_rate) / 2.0;

    let mut out = Vec::new();
    for (frame, e) in frames.iter().zip(&energy) {
        if !(loudest > 0.0 && *e >= VOICED_ENERGY_RATIO * loudest) {
            continue;
        }
        let Ok(model) = lpc::analyze_frame(&frame.samples, config.lpc_order, frame.frame_index)
        else {
            continue;
        };
        let Ok(formants) = lpc::formants_from_poles(&model, config.sample_rate) else {
            continue;
        };
        let picked: Vec<f64> = formants
            .iter()
            .filter(|f| {
                f.bandwidth_hz < MAX_FORMANT_BANDWIDTH_HZ
                    && f.frequency_hz > EDGE_GUARD_HZ
                    && f.frequency_hz < nyquist - EDGE_GUARD_HZ
            })
            .take(N_FORMANTS)
            .map(|f| f.frequency_hz)
            .collect();
        if let Ok(three) = <[f64; N_FORMANTS]>::try_from(picked) {
            out.push(three);
        }
    }
    Ok(out)
}

pub fn corpus_formants(
    config: &AugmentConfig,
    dir: &Path,
) -> Result<FormantSummary, PipelineError> {
    let extractor = Extractor::new(config)?;
    let utterances = discover(dir)?;
    // unreadable files contribute no frames
    let per_clip = par_map(config.jobs, &utterances, |u| {
        clip_formants(&extractor, &u.path).unwrap_or_default()
    })?;
    let rows: Vec<[f64; N_FORMANTS]> = per_clip.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(PipelineError::NoVoicedFrames(dir.to_path_buf()));
    }
    let n = rows.len() as f64;
    let mut mean_hz = [0.0; N_FORMANTS];
    let mut std_hz = [0.0; N_FORMANTS];
    for i in 0..N_FORMANTS {
        mean_hz[i] = rows.iter().map(|r| r[i]).sum::<f64>() / n;
        std_hz[i] = (rows
            .iter()
            .map(|r| (r[i] - mean_hz[i]).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
    }
    Ok(FormantSummary {
        mean_hz,
        std_hz,
        voiced_frames: rows.len(),
    })
}

pub fn run_formant_stats(
    config: &AugmentConfig,
    corpus_a: &Path,
    corpus_b: &Path,
) -> Result<FormantStats, PipelineError> {
    let a = corpus_formants(config, corpus_a)?;
    let b = corpus_formants(config, corpus_b)?;
    let ratio = std::array::from_fn(|i| b.mean_hz[i] / a.mean_hz[i]);
    Ok(FormantStats {
        corpus_a: a,
        corpus_b: b,
        ratio,
    })
}

impl FormantStats {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), PipelineError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "formant",
            "a_mean_hz",
            "a_std_hz",
            "b_mean_hz",
            "b_std_hz",
            "ratio_b_over_a",
            "a_voiced_frames",
            "b_voiced_frames",
        ])?;
        for i in 0..N_FORMANTS {
            w.write_record([
                format!("F{}", i + 1),
                self.corpus_a.mean_hz[i].to_string(),
                self.corpus_a.std_hz[i].to_string(),
                self.corpus_b.mean_hz[i].to_string(),
                self.corpus_b.std_hz[i].to_string(),
                self.ratio[i].to_string(),
                self.corpus_a.voiced_frames.to_string(),
                self.corpus_b.voiced_frames.to_string(),
            ])?;
        }
        w.flush()
            .map_err(|e| PipelineError::io(Path::new("<csv>"), e))?;
        Ok(())
    }
}
