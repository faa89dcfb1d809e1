//! Test-only synthesis oracles. Nothing here touches the LPC analysis path:
//! vowels are built by running an impulse train through two-pole resonators
//! placed at known frequencies and radii.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

use spectroforge::lpc::LpcModel;

pub const FS: u32 = 16000;

/// Small deterministic generator so the oracles do not share the crate's RNG.
pub struct XorShift(u64);

impl XorShift {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x2545_f491_4f6c_dd1d) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut s = self.0;
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        self.0 = s;
        s
    }

    /// Uniform in `[-1, 1)`.
    pub fn signed(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.signed() + 1.0) / 2.0
    }
}

/// `A(z)` polynomial (leading 1) whose roots are the conjugate pole pairs.
pub fn resonator_polynomial(resonators: &[(f64, f64)], fs: u32) -> Vec<f64> {
    let mut poly = vec![1.0];
    for &(freq, radius) in resonators {
        let theta = 2.0 * PI * freq / f64::from(fs);
        let section = [1.0, -2.0 * radius * theta.cos(), radius * radius];
        let mut next = vec![0.0; poly.len() + 2];
        for (i, p) in poly.iter().enumerate() {
            for (j, s) in section.iter().enumerate() {
                next[i + j] += p * s;
            }
        }
        poly = next;
    }
    poly
}

/// All-pole model with the resonators as its only poles.
pub fn resonator_model(resonators: &[(f64, f64)], fs: u32) -> LpcModel {
    let poly = resonator_polynomial(resonators, fs);
    LpcModel {
        order: poly.len() - 1,
        coefficients: poly[1..].iter().map(|c| -c).collect(),
        reflection: Vec::new(),
        gain: 1.0,
        prediction_error: 1.0,
        frame_index: 0,
    }
}

/// Impulse train at `f0` through the resonator cascade, scaled to peak 0.5.
pub fn synth_vowel(resonators: &[(f64, f64)], f0: f64, n_samples: usize) -> Vec<f64> {
    let period = f64::from(FS) / f0;
    let mut x: Vec<f64> = (0..n_samples)
        .map(|n| {
            let phase = n as f64 % period;
            if phase < 1.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for &(freq, radius) in resonators {
        let theta = 2.0 * PI * freq / f64::from(FS);
        let (b1, b2) = (2.0 * radius * theta.cos(), -radius * radius);
        let (mut y1, mut y2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let y = *v + b1 * y1 + b2 * y2;
            y2 = y1;
            y1 = y;
            *v = y;
        }
    }
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    x.iter().map(|v| 0.5 * v / peak).collect()
}

/// Hamming-windowed slice, computed independently of the crate's framing.
pub fn hamming_frame(x: &[f64], start: usize, len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| x[start + n] * (0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos()))
        .collect()
}

pub fn write_wav16(path: &Path, samples: &[f64], fs: u32) {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: fs,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for s in samples {
        w.write_sample((s.clamp(-1.0, 1.0) * 32767.0).round() as i16)
            .unwrap();
    }
    w.finalize().unwrap();
}

/// Vowel-like resonator sets (Hz, radius), adult-male-ish.
pub const VOWELS: [[(f64, f64); 4]; 5] = [
    [
        (730.0, 0.97),
        (1090.0, 0.97),
        (2440.0, 0.97),
        (3400.0, 0.97),
    ],
    [
        (270.0, 0.97),
        (2290.0, 0.97),
        (3010.0, 0.97),
        (3900.0, 0.97),
    ],
    [
        (530.0, 0.97),
        (1840.0, 0.97),
        (2480.0, 0.97),
        (3600.0, 0.97),
    ],
    [(570.0, 0.97), (840.0, 0.97), (2410.0, 0.97), (3300.0, 0.97)],
    [
        (440.0, 0.97),
        (1020.0, 0.97),
        (2240.0, 0.97),
        (3500.0, 0.97),
    ],
];

/// Writes `n` synthetic utterances of `secs` seconds each to `dir`.
pub fn write_corpus(dir: &Path, n: usize, secs: f64) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..n {
        let vowel = &VOWELS[i % VOWELS.len()];
        let f0 = 100.0 + 7.0 * i as f64;
        let x = synth_vowel(vowel, f0, (secs * f64::from(FS)) as usize);
        write_wav16(&dir.join(format!("utt{i:03}.wav")), &x, FS);
    }
}

/// Geometric over arithmetic mean of the positive bins (skips DC and Nyquist).
pub fn spectral_flatness(mag: &[f64]) -> f64 {
    let inner = &mag[1..mag.len() - 1];
    let n = inner.len() as f64;
    let log_mean = inner.iter().map(|v| v.max(1e-300).ln()).sum::<f64>() / n;
    let mean = inner.iter().sum::<f64>() / n;
    log_mean.exp() / mean
}
