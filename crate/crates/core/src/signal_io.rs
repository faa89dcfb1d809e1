//! Audio ingestion, pre-emphasis and framing.
//!
//! Everything downstream works on mono `f64` amplitudes in `[-1, 1]`. The
//! reader accepts 16-bit integer PCM and 32-bit IEEE float WAV files; other
//! encodings are rejected rather than converted.

use std::f64::consts::PI;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: hound::Error,
    },
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("audio contains no samples")]
    Empty,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("pre-emphasis coefficient {0} outside [0, 1)")]
    BadCoefficient(f64),
    #[error("invalid framing: frame {frame_ms} ms, hop {hop_ms} ms")]
    BadFraming { frame_ms: f64, hop_ms: f64 },
    #[error("clip of {len} samples is shorter than one frame of {frame_len}")]
    TooShort { len: usize, frame_len: usize },
}

/// A mono clip of audio.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub channel_count: u16,
    pub source_id: String,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_id: impl Into<String>) -> Self {
        Self {
            samples,
            sample_rate,
            channel_count: 1,
            source_id: source_id.into(),
        }
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Reads a WAV file and downmixes it to mono.
///
/// Integer samples are scaled by `2^(bits-1)`; the source id is the file stem.
pub fn load_audio(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let path = path.as_ref();
    let unreadable = |source| AudioError::Unreadable {
        path: path.display().to_string(),
        source,
    };
    let mut reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::Unsupported => {
            AudioError::UnsupportedEncoding("non-PCM / compressed format".into())
        }
        e => unreadable(e),
    })?;
    let spec = reader.spec();
    if spec.sample_rate == 0 {
        return Err(AudioError::UnsupportedEncoding("zero sample rate".into()));
    }
    if spec.channels == 0 {
        return Err(AudioError::UnsupportedEncoding("zero channels".into()));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => {
            let scale = f64::from(1u32 << 15);
            reader
                .samples::<i16>()
                .map(|s| s.map(|v| f64::from(v) / scale))
                .collect::<Result<_, _>>()
                .map_err(unreadable)?
        }
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(unreadable)?,
        (fmt, bits) => {
            return Err(AudioError::UnsupportedEncoding(format!(
                "{bits}-bit {fmt:?}"
            )))
        }
    };

    let channels = usize::from(spec.channels);
    if interleaved.len() < channels {
        return Err(AudioError::Empty);
    }
    let samples: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|c| c.iter().sum::<f64>() / channels as f64)
        .collect();
    if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
        return Err(AudioError::NonFinite(i));
    }

    let source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(AudioClip::new(samples, spec.sample_rate, source_id))
}

/// First-order pre-emphasis, `y[n] = x[n] - c * x[n-1]` with `y[0] = x[0]`.
pub fn pre_emphasize(clip: &AudioClip, coefficient: f64) -> Result<AudioClip, AudioError> {
    if !(0.0..1.0).contains(&coefficient) {
        return Err(AudioError::BadCoefficient(coefficient));
    }
    let x = &clip.samples;
    let mut samples = Vec::with_capacity(x.len());
    if let Some(&first) = x.first() {
        samples.push(first);
        samples.extend(x.windows(2).map(|w| w[1] - coefficient * w[0]));
    }
    Ok(AudioClip {
        samples,
        ..clip.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    /// No taper.
    Rectangular,
    #[default]
    Hamming,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hamming if len == 1 => vec![1.0],
            Window::Hamming => {
                let denom = (len - 1) as f64;
                (0..len)
                    .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / denom).cos())
                    .collect()
            }
        }
    }
}

/// One analysis frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub samples: Vec<f64>,
    pub start_sample: usize,
    pub frame_index: usize,
    pub window_applied: bool,
}

/// Frame and hop lengths in samples for a given rate.
pub fn frame_geometry(sample_rate: u32, frame_ms: f64, hop_ms: f64) -> (usize, usize) {
    let to_samples = |ms: f64| (ms * f64::from(sample_rate) / 1000.0).round() as usize;
    (to_samples(frame_ms), to_samples(hop_ms))
}

/// Number of whole frames that fit in `len` samples. Partial tail frames are dropped.
pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if len < frame_len || frame_len == 0 || hop == 0 {
        0
    } else {
        (len - frame_len) / hop + 1
    }
}

/// Slices a clip into overlapping windowed frames.
pub fn frame_signal(
    clip: &AudioClip,
    frame_ms: f64,
    hop_ms: f64,
    window: Window,
) -> Result<Vec<Frame>, AudioError> {
    let bad = || AudioError::BadFraming { frame_ms, hop_ms };
    if !(hop_ms > 0.0 && frame_ms >= hop_ms && frame_ms.is_finite()) {
        return Err(bad());
    }
    let (frame_len, hop) = frame_geometry(clip.sample_rate, frame_ms, hop_ms);
    if frame_len == 0 || hop == 0 {
        return Err(bad());
    }
    let n = frame_count(clip.samples.len(), frame_len, hop);
    if n == 0 {
        return Err(AudioError::TooShort {
            len: clip.samples.len(),
            frame_len,
        });
    }

    let taper = window.coefficients(frame_len);
    let window_applied = window != Window::Rectangular;
    Ok((0..n)
        .map(|frame_index| {
            let start_sample = frame_index * hop;
            let samples = clip.samples[start_sample..start_sample + frame_len]
                .iter()
                .zip(&taper)
                .map(|(x, w)| x * w)
                .collect();
            Frame {
                samples,
                start_sample,
                frame_index,
                window_applied,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clip(samples: Vec<f64>) -> AudioClip {
        AudioClip::new(samples, 16000, "t")
    }

    #[test]
    fn pre_emphasis_zero_is_identity() {
        let c = clip(vec![0.3, -0.2, 0.9]);
        assert_eq!(pre_emphasize(&c, 0.0).unwrap(), c);
    }

    #[test]
    fn pre_emphasis_constant_input() {
        let out = pre_emphasize(&clip(vec![1.0, 1.0, 1.0]), 0.97).unwrap();
        assert_eq!(out.samples[0], 1.0);
        assert!((out.samples[1] - 0.03).abs() < 1e-15);
        assert!((out.samples[2] - 0.03).abs() < 1e-15);
    }

    #[test]
    fn pre_emphasis_matches_reference_loop() {
        // xorshift so the input is fixed without pulling in an RNG
        let mut s = 0x2545_f491_4f6c_dd1du64;
        let x: Vec<f64> = (0..100)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            })
            .collect();
        let out = pre_emphasize(&clip(x.clone()), 0.97).unwrap();
        let mut expected = vec![0.0; x.len()];
        for n in 0..x.len() {
            let prev = if n == 0 { 0.0 } else { x[n - 1] };
            expected[n] = x[n] - 0.97 * prev;
        }
        assert_eq!(out.samples, expected);
    }

    #[test]
    fn pre_emphasis_rejects_bad_coefficient() {
        let c = clip(vec![1.0]);
        assert!(matches!(
            pre_emphasize(&c, 1.0),
            Err(AudioError::BadCoefficient(_))
        ));
        assert!(matches!(
            pre_emphasize(&c, -0.1),
            Err(AudioError::BadCoefficient(_))
        ));
    }

    #[test]
    fn one_second_gives_98_frames() {
        let c = clip(vec![0.1; 16000]);
        let frames = frame_signal(&c, 25.0, 10.0, Window::Hamming).unwrap();
        // enumerate every start offset whose window fits
        let oracle = (0..16000).step_by(160).filter(|s| s + 400 <= 16000).count();
        assert_eq!(frames.len(), oracle);
        assert_eq!(frames.len(), 98);
        assert!(frames.iter().all(|f| f.samples.len() == 400));
        assert_eq!(frames.last().unwrap().start_sample, 97 * 160);
    }

    #[test]
    fn rectangular_constant_frames_are_ones() {
        let c = clip(vec![1.0; 1000]);
        for f in frame_signal(&c, 25.0, 10.0, Window::Rectangular).unwrap() {
            assert!(!f.window_applied);
            assert!(f.samples.iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn hamming_frame_of_ones_is_the_window() {
        let c = clip(vec![1.0; 400]);
        let frames = frame_signal(&c, 25.0, 10.0, Window::Hamming).unwrap();
        assert_eq!(frames.len(), 1);
        assert!(frames[0].window_applied);
        assert_eq!(frames[0].samples, Window::Hamming.coefficients(400));
        assert!((frames[0].samples[0] - 0.08).abs() < 1e-12);
    }

    #[test]
    fn short_clip_is_an_error() {
        let c = clip(vec![0.0; 399]);
        assert!(matches!(
            frame_signal(&c, 25.0, 10.0, Window::Hamming),
            Err(AudioError::TooShort {
                len: 399,
                frame_len: 400
            })
        ));
    }

    #[test]
    fn hop_longer_than_frame_is_an_error() {
        let c = clip(vec![0.0; 4000]);
        assert!(matches!(
            frame_signal(&c, 10.0, 25.0, Window::Hamming),
            Err(AudioError::BadFraming { .. })
        ));
        assert!(frame_signal(&c, 25.0, 0.0, Window::Hamming).is_err());
    }

    proptest! {
        #[test]
        fn frame_starts_form_arithmetic_sequence(len in 400usize..5000, hop_ms in 1.0f64..25.0) {
            let c = clip(vec![0.5; len]);
            let frames = frame_signal(&c, 25.0, hop_ms, Window::Hamming).unwrap();
            let (_, hop) = frame_geometry(16000, 25.0, hop_ms);
            for (i, f) in frames.iter().enumerate() {
                prop_assert_eq!(f.frame_index, i);
                prop_assert_eq!(f.start_sample, i * hop);
            }
            prop_assert_eq!(frames.len(), frame_count(len, 400, hop));
        }

        #[test]
        fn pre_emphasis_is_linear(
            x in proptest::collection::vec(-1.0f64..1.0, 1..64),
            a in -4.0f64..4.0,
        ) {
            let base = pre_emphasize(&clip(x.clone()), 0.97).unwrap();
            let scaled = pre_emphasize(&clip(x.iter().map(|v| a * v).collect()), 0.97).unwrap();
            for (s, b) in scaled.samples.iter().zip(&base.samples) {
                let expected = a * b;
                let ulp = f64::EPSILON * expected.abs().max(f64::MIN_POSITIVE) * 4.0;
                prop_assert!((s - expected).abs() <= ulp.max(1e-15), "{} vs {}", s, expected);
            }
        }
    }
}
