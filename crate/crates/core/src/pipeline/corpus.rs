//! Corpus-level featurize and augment runs.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::{AugmentConfig, FactorGranularity, PipelineError};
use crate::augment::{FrameAugmenter, WarpFactors, WarpTarget};
use crate::features::{
    apply_filterbank, spec_augment, write_features, FeatureMatrix, FeatureMeta, MelFilterbank,
};
use crate::seed;
use crate::signal_io::{self, AudioClip, Window};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const ARCHIVE_EXT: &str = "sfg";
/// Salt separating the masking generator from the factor generator.
const MASK_SALT: u64 = 0x6d61_736b_5f73_6565;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    SkippedDegenerate,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub utterance_id: String,
    /// Relative to the input directory.
    pub audio_path: String,
    /// Relative to the output directory; empty when nothing was written.
    pub feature_path: String,
    pub preset: String,
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub n_frames: usize,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn count(&self, status: Status) -> usize {
        self.entries.iter().filter(|e| e.status == status).count()
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<(), PipelineError> {
        let path = path.as_ref();
        let mut out = Vec::new();
        for e in &self.entries {
            serde_json::to_writer(&mut out, e)?;
            out.push(b'\n');
        }
        fs::File::create(path)
            .and_then(|mut f| f.write_all(&out))
            .map_err(|e| PipelineError::io(path, e))
    }

    pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
        let mut entries = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| PipelineError::io(path, e))?;
            if !line.trim().is_empty() {
                entries.push(serde_json::from_str(&line)?);
            }
        }
        Ok(Self { entries })
    }
}

/// A WAV file found under the input directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub id: String,
    pub path: PathBuf,
    pub relative: String,
}

/// WAV files under `dir`, sorted by path. Ids are the relative path without
/// extension, with separators replaced by `__`.
pub fn discover(dir: &Path) -> Result<Vec<Utterance>, PipelineError> {
    if !dir.is_dir() {
        return Err(PipelineError::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let mut found = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| PipelineError::io(dir, e.into()))?;
        let path = entry.path();
        let is_wav = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
        if !entry.file_type().is_file() || !is_wav {
            continue;
        }
        let rel = path.strip_prefix(dir).expect("walkdir stays under root");
        let relative = rel.to_string_lossy().replace('\\', "/");
        let id = rel
            .with_extension("")
            .to_string_lossy()
            .replace(['/', '\\'], "__");
        found.push(Utterance {
            id,
            path: path.to_path_buf(),
            relative,
        });
    }
    if found.is_empty() {
        return Err(PipelineError::EmptyInput(dir.to_path_buf()));
    }
    Ok(found)
}

pub(crate) fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>, PipelineError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

/// Shared per-run state: filterbank and FFT plan are built once.
pub struct Extractor {
    config: AugmentConfig,
    filterbank: MelFilterbank,
    augmenter: FrameAugmenter,
}

/// Result of augmenting one utterance copy.
pub struct AugmentedUtterance {
    pub features: FeatureMatrix,
    pub factors: Option<WarpFactors>,
    pub degenerate_frames: usize,
}

impl Extractor {
    pub fn new(config: &AugmentConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        Ok(Self {
            filterbank: MelFilterbank::new(config.n_mel, config.n_bins(), config.sample_rate)?,
            augmenter: FrameAugmenter::new(
                config.preset_name.preset(),
                config.lpc_order,
                config.fft_size,
                config.sample_rate,
            )?,
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &AugmentConfig {
        &self.config
    }

    pub fn augmenter(&self) -> &FrameAugmenter {
        &self.augmenter
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.filterbank
    }

    /// Loads a clip, checks its rate and applies the configured pre-emphasis.
    pub fn load(&self, path: &Path) -> Result<AudioClip, PipelineError> {
        let clip = signal_io::load_audio(path)?;
        self.prepare(clip)
    }

    pub fn prepare(&self, clip: AudioClip) -> Result<AudioClip, PipelineError> {
        if clip.sample_rate != self.config.sample_rate {
            return Err(PipelineError::SampleRate {
                expected: self.config.sample_rate,
                got: clip.sample_rate,
            });
        }
        Ok(match self.config.pre_emphasis {
            Some(c) => signal_io::pre_emphasize(&clip, c)?,
            None => clip,
        })
    }

    pub fn frames(&self, clip: &AudioClip) -> Result<Vec<signal_io::Frame>, PipelineError> {
        Ok(signal_io::frame_signal(
            clip,
            self.config.frame_ms,
            self.config.hop_ms,
            Window::Hamming,
        )?)
    }

    fn meta(
        &self,
        clip: &AudioClip,
        preset: &str,
        seed: u64,
        factors: Option<&WarpFactors>,
    ) -> FeatureMeta {
        FeatureMeta {
            source_id: clip.source_id.clone(),
            preset_name: preset.to_string(),
            rng_seed: seed,
            alphas: factors.map(|f| f.alphas.clone()).unwrap_or_default(),
            betas: factors.map(|f| f.betas.clone()).unwrap_or_default(),
            sample_rate: clip.sample_rate,
            frame_ms: self.config.frame_ms,
            hop_ms: self.config.hop_ms,
        }
    }

    /// Log-mel features of the unmodified spectrum.
    pub fn featurize(&self, clip: &AudioClip) -> Result<FeatureMatrix, PipelineError> {
        let rows = self
            .frames(clip)?
            .iter()
            .map(|f| {
                let mag = self.augmenter.magnitude(&f.samples)?;
                Ok(apply_filterbank(&mag.magnitudes, &self.filterbank)?)
            })
            .collect::<Result<Vec<_>, PipelineError>>()?;
        Ok(FeatureMatrix::from_rows(
            &rows,
            self.config.n_mel,
            self.meta(clip, "none", 0, None),
        ))
    }

    /// Log-mel features of the perturbed spectrum for one copy.
    pub fn augment(
        &self,
        clip: &AudioClip,
        copy_index: u64,
    ) -> Result<AugmentedUtterance, PipelineError> {
        let utt_seed = seed::utterance_seed(self.config.global_seed, &clip.source_id, copy_index);
        let preset = self.augmenter.preset();
        let utterance_factors = preset.draw(utt_seed);
        let frames = self.frames(clip)?;
        let mut degenerate_frames = 0;
        let mut rows = Vec::with_capacity(frames.len());
        for frame in &frames {
            let frame_factors;
            let factors = match self.config.factor_granularity {
                FactorGranularity::PerUtterance => &utterance_factors,
                FactorGranularity::PerFrame => {
                    frame_factors = preset.draw(seed::frame_seed(utt_seed, frame.frame_index));
                    &frame_factors
                }
            };
            let (spectrum, degenerate) = self.augmenter.process(&frame.samples, factors)?;
            degenerate_frames += usize::from(degenerate);
            rows.push(apply_filterbank(&spectrum, &self.filterbank)?);
        }

        let recorded = (self.config.factor_granularity == FactorGranularity::PerUtterance)
            .then_some(&utterance_factors);
        let meta = self.meta(clip, preset.name.as_str(), utt_seed, recorded);
        let mut features = FeatureMatrix::from_rows(&rows, self.config.n_mel, meta);
        if self.config.spec_augment && !self.config.mask.is_noop() {
            features = spec_augment(
                &features,
                &self.config.mask,
                seed::mix(utt_seed ^ MASK_SALT),
            );
        }
        Ok(AugmentedUtterance {
            features,
            factors: recorded.cloned(),
            degenerate_frames,
        })
    }
}

fn error_entry(
    utt: &Utterance,
    preset: &str,
    seed: u64,
    utterance_id: String,
    err: &PipelineError,
) -> ManifestEntry {
    ManifestEntry {
        utterance_id,
        audio_path: utt.relative.clone(),
        feature_path: String::new(),
        preset: preset.to_string(),
        seed,
        alphas: Vec::new(),
        betas: Vec::new(),
        n_frames: 0,
        status: Status::Error,
        message: Some(err.to_string()),
    }
}

fn prepare_output(output_dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(output_dir).map_err(|e| PipelineError::io(output_dir, e))
}

fn clip_with_id(extractor: &Extractor, utt: &Utterance) -> Result<AudioClip, PipelineError> {
    let mut clip = extractor.load(&utt.path)?;
    clip.source_id = utt.id.clone();
    Ok(clip)
}

/// Plain log-mel features for every WAV under `input_dir`.
pub fn run_featurize(
    config: &AugmentConfig,
    input_dir: &Path,
    output_dir: &Path,
) -> Result<CorpusManifest, PipelineError> {
    let extractor = Extractor::new(config)?;
    let utterances = discover(input_dir)?;
    prepare_output(output_dir)?;

    let entries = par_map(config.jobs, &utterances, |utt| {
        let feature_path = format!("{}.{ARCHIVE_EXT}", utt.id);
        let result = clip_with_id(&extractor, utt)
            .and_then(|clip| extractor.featurize(&clip))
            .and_then(|fm| {
                write_features(&fm, output_dir.join(&feature_path))?;
                Ok(fm.n_frames)
            });
        match result {
            Ok(n_frames) => ManifestEntry {
                utterance_id: utt.id.clone(),
                audio_path: utt.relative.clone(),
                feature_path,
                preset: "none".into(),
                seed: 0,
                alphas: Vec::new(),
                betas: Vec::new(),
                n_frames,
                status: Status::Ok,
                message: None,
            },
            Err(e) => error_entry(utt, "none", 0, utt.id.clone(), &e),
        }
    })?;

    let manifest = CorpusManifest { entries };
    manifest.write_jsonl(output_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Augmented log-mel features, `augment_copies` per WAV under `input_dir`.
pub fn run_augment(
    config: &AugmentConfig,
    input_dir: &Path,
    output_dir: &Path,
) -> Result<CorpusManifest, PipelineError> {
    let extractor = Extractor::new(config)?;
    let utterances = discover(input_dir)?;
    prepare_output(output_dir)?;
    let preset = config.preset_name;
    let copies = config.augment_copies as u64;

    let per_utterance = par_map(config.jobs, &utterances, |utt| {
        let clip = clip_with_id(&extractor, utt);
        (0..copies)
            .map(|copy| {
                let utterance_id = format!("{}.{preset}.{copy}", utt.id);
                let utt_seed = seed::utterance_seed(config.global_seed, &utt.id, copy);
                let clip = match &clip {
                    Ok(c) => c,
                    Err(e) => return error_entry(utt, preset.as_str(), utt_seed, utterance_id, e),
                };
                match augment_copy(&extractor, clip, copy, &utterance_id, output_dir) {
                    Ok(mut entry) => {
                        entry.audio_path = utt.relative.clone();
                        entry
                    }
                    Err(e) => error_entry(utt, preset.as_str(), utt_seed, utterance_id, &e),
                }
            })
            .collect::<Vec<_>>()
    })?;

    let manifest = CorpusManifest {
        entries: per_utterance.into_iter().flatten().collect(),
    };
    manifest.write_jsonl(output_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

fn augment_copy(
    extractor: &Extractor,
    clip: &AudioClip,
    copy: u64,
    utterance_id: &str,
    output_dir: &Path,
) -> Result<ManifestEntry, PipelineError> {
    let out = extractor.augment(clip, copy)?;
    let meta = &out.features.meta;
    let n_frames = out.features.n_frames;
    let uses_lpc = extractor.augmenter().preset().target == WarpTarget::LpcEnvelope;
    let all_degenerate = uses_lpc && out.degenerate_frames == n_frames;

    let feature_path = if all_degenerate {
        String::new()
    } else {
        let name = format!("{utterance_id}.{ARCHIVE_EXT}");
        write_features(&out.features, output_dir.join(&name))?;
        name
    };
    Ok(ManifestEntry {
        utterance_id: utterance_id.to_string(),
        audio_path: String::new(),
        feature_path,
        preset: meta.preset_name.clone(),
        seed: meta.rng_seed,
        alphas: meta.alphas.clone(),
        betas: meta.betas.clone(),
        n_frames,
        status: if all_degenerate {
            Status::SkippedDegenerate
        } else {
            Status::Ok
        },
        message: all_degenerate.then(|| "every frame failed LPC analysis".to_string()),
    })
}
