//! Per-frame linear prediction.
//!
//! Sign convention: `A(z) = 1 - sum_{i=1..p} a[i] z^-i`, so `coefficients`
//! holds the predictor taps `a[1..=p]` and the all-pole envelope is
//! `gain / |A(e^jw)|`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, Schur};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::spectrum::SpectralEnvelope;

/// Relative white-noise floor added to `r[0]` before the recursion.
pub const NOISE_FLOOR: f64 = 1e-9;
/// Division guard used by [`residual_spectrum`].
pub const RESIDUAL_EPSILON: f64 = 1e-10;
/// Poles at or inside this radius are not treated as formants.
pub const FORMANT_MIN_RADIUS: f64 = 0.7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpcError {
    #[error("max lag {max_lag} must be below frame length {len}")]
    LagTooLarge { max_lag: usize, len: usize },
    #[error("order {order} needs {needed} autocorrelation lags, got {got}")]
    OrderTooHigh {
        order: usize,
        needed: usize,
        got: usize,
    },
    #[error("degenerate frame: zero energy")]
    Degenerate,
    #[error("ill-conditioned frame at recursion step {step}")]
    IllConditioned { step: usize },
    #[error("fft size {fft_size} must be a power of two of at least {min}")]
    BadFftSize { fft_size: usize, min: usize },
    #[error("frame of {len} samples does not fit fft size {fft_size}")]
    FrameTooLong { len: usize, fft_size: usize },
    #[error("envelope has {got} bins, expected {expected}")]
    BinMismatch { expected: usize, got: usize },
    #[error("root finder did not converge")]
    RootsDidNotConverge,
}

/// All-pole model of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcModel {
    pub order: usize,
    /// Predictor taps `a[1..=p]`.
    pub coefficients: Vec<f64>,
    /// Reflection coefficients produced by the recursion, one per step.
    pub reflection: Vec<f64>,
    pub gain: f64,
    pub prediction_error: f64,
    pub frame_index: usize,
}

impl LpcModel {
    /// Coefficients of `A(z)` including the leading 1.
    pub fn inverse_filter(&self) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(self.coefficients.iter().map(|a| -a))
            .collect()
    }

    /// `gain / |A(e^{jw})|` at a single frequency.
    pub fn response_at(&self, freq_hz: f64, sample_rate: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / sample_rate;
        let a: Complex64 = self
            .inverse_filter()
            .iter()
            .enumerate()
            .map(|(n, c)| Complex64::from_polar(*c, -w * n as f64))
            .sum();
        self.gain / a.norm()
    }
}

/// `r[k] = sum_n x[n] x[n+k]` for `k = 0..=max_lag`.
pub fn autocorrelate(x: &[f64], max_lag: usize) -> Result<Vec<f64>, LpcError> {
    if max_lag >= x.len() {
        return Err(LpcError::LagTooLarge {
            max_lag,
            len: x.len(),
        });
    }
    Ok((0..=max_lag)
        .map(|lag| x[lag..].iter().zip(x).map(|(a, b)| a * b).sum())
        .collect())
}

/// Solves the Toeplitz normal equations for the predictor of the given order.
pub fn levinson_durbin(r: &[f64], order: usize) -> Result<LpcModel, LpcError> {
    if r.len() < order + 1 {
        return Err(LpcError::OrderTooHigh {
            order,
            needed: order + 1,
            got: r.len(),
        });
    }
    if !(r[0] > 0.0) {
        return Err(LpcError::Degenerate);
    }

    let mut a = vec![0.0; order];
    let mut prev = vec![0.0; order];
    let mut reflection = Vec::with_capacity(order);
    let mut err = r[0];
    for i in 0..order {
        let acc: f64 = (0..i).map(|j| a[j] * r[i - j]).sum();
        let k = (r[i + 1] - acc) / err;
        prev[..i].copy_from_slice(&a[..i]);
        for j in 0..i {
            a[j] = prev[j] - k * prev[i - 1 - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        reflection.push(k);
        if !(err > 0.0) || k.abs() >= 1.0 {
            return Err(LpcError::IllConditioned { step: i + 1 });
        }
    }

    Ok(LpcModel {
        order,
        coefficients: a,
        reflection,
        gain: err.sqrt(),
        prediction_error: err,
        frame_index: 0,
    })
}

/// Autocorrelation plus recursion, with the noise floor applied to `r[0]`.
pub fn analyze_frame(
    samples: &[f64],
    order: usize,
    frame_index: usize,
) -> Result<LpcModel, LpcError> {
    let mut r = autocorrelate(samples, order)?;
    if !(r[0] > 0.0) {
        return Err(LpcError::Degenerate);
    }
    r[0] *= 1.0 + NOISE_FLOOR;
    let mut model = levinson_durbin(&r, order)?;
    model.frame_index = frame_index;
    Ok(model)
}

/// Forward FFT of a zero-padded real frame. Holds a planned transform so
/// repeated calls at one size avoid re-planning.
#[derive(Clone)]
pub struct Spectrum {
    fft: Arc<dyn Fft<f64>>,
    size: usize,
}

impl std::fmt::Debug for Spectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectrum")
            .field("size", &self.size)
            .finish()
    }
}

impl Spectrum {
    pub fn new(size: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(size);
        Self { fft, size }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Magnitudes of bins `0..=size/2`.
    pub fn magnitude(&self, x: &[f64]) -> Result<Vec<f64>, LpcError> {
        if x.len() > self.size {
            return Err(LpcError::FrameTooLong {
                len: x.len(),
                fft_size: self.size,
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (b, &v) in buf.iter_mut().zip(x) {
            b.re = v;
        }
        self.fft.process(&mut buf);
        Ok(buf[..=self.size / 2].iter().map(|c| c.norm()).collect())
    }
}

fn check_fft_size(fft_size: usize, min: usize) -> Result<(), LpcError> {
    if fft_size.is_power_of_two() && fft_size >= min.max(2) {
        Ok(())
    } else {
        Err(LpcError::BadFftSize { fft_size, min })
    }
}

/// Samples the all-pole envelope on `fft_size/2 + 1` bins.
pub fn envelope(
    model: &LpcModel,
    fft_size: usize,
    sample_rate: u32,
) -> Result<SpectralEnvelope, LpcError> {
    envelope_with(model, &Spectrum::new(fft_size), sample_rate)
}

pub fn envelope_with(
    model: &LpcModel,
    spectrum: &Spectrum,
    sample_rate: u32,
) -> Result<SpectralEnvelope, LpcError> {
    check_fft_size(spectrum.size(), 2 * model.order)?;
    let denom = spectrum.magnitude(&model.inverse_filter())?;
    let magnitudes = denom.iter().map(|d| model.gain / d).collect();
    Ok(SpectralEnvelope::new(magnitudes, sample_rate))
}

/// `|FFT(frame)| / max(env, eps)` per bin.
pub fn residual_spectrum(
    frame: &[f64],
    env: &SpectralEnvelope,
    fft_size: usize,
) -> Result<Vec<f64>, LpcError> {
    let spectrum = Spectrum::new(fft_size);
    let magnitude = spectrum.magnitude(frame)?;
    residual_from_magnitude(&magnitude, env)
}

pub fn residual_from_magnitude(
    magnitude: &[f64],
    env: &SpectralEnvelope,
) -> Result<Vec<f64>, LpcError> {
    if magnitude.len() != env.len() {
        return Err(LpcError::BinMismatch {
            expected: env.len(),
            got: magnitude.len(),
        });
    }
    Ok(magnitude
        .iter()
        .zip(&env.magnitudes)
        .map(|(m, e)| m / e.max(RESIDUAL_EPSILON))
        .collect())
}

/// A resonance taken from one pole of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Formant {
    pub frequency_hz: f64,
    pub bandwidth_hz: f64,
    /// Envelope value at `frequency_hz`.
    pub magnitude: f64,
}

/// Roots of `z^p - a1 z^(p-1) - ... - ap`, via companion-matrix eigenvalues.
pub fn poles(model: &LpcModel) -> Result<Vec<Complex64>, LpcError> {
    // trailing zero taps only add roots at the origin
    let degree = model
        .coefficients
        .iter()
        .rposition(|&a| a != 0.0)
        .map_or(0, |i| i + 1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for (j, a) in model.coefficients[..degree].iter().enumerate() {
        companion[(0, j)] = *a;
    }
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    let schur = Schur::try_new(companion, 1e-14, 10_000).ok_or(LpcError::RootsDidNotConverge)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|c| Complex64::new(c.re, c.im))
        .collect())
}

/// Formants from the upper-half-plane poles with radius above
/// [`FORMANT_MIN_RADIUS`], sorted by frequency.
pub fn formants_from_poles(model: &LpcModel, sample_rate: u32) -> Result<Vec<Formant>, LpcError> {
    let fs = f64::from(sample_rate);
    let mut formants: Vec<Formant> = poles(model)?
        .into_iter()
        .filter(|p| p.im > 0.0 && p.norm() > FORMANT_MIN_RADIUS)
        .map(|p| {
            let frequency_hz = p.arg() * fs / (2.0 * PI);
            Formant {
                frequency_hz,
                bandwidth_hz: -p.norm().ln() * fs / PI,
                magnitude: model.response_at(frequency_hz, fs),
            }
        })
        .collect();
    formants.sort_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz));
    Ok(formants)
}
