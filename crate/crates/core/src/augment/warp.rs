//! Piecewise-linear frequency warping and per-segment energy scaling.

use serde::Serialize;

use super::preset::WarpFactors;
use super::segments::SegmentMap;
use super::AugmentError;
use crate::spectrum::SpectralEnvelope;

/// Cumulative targets past Nyquist are rescaled so the last one lands here.
pub const OVERFLOW_TARGET_FRACTION: f64 = 0.95;

/// Monotone piecewise-linear bijection of `[0, nyquist]`.
///
/// `anchors` are `(source_hz, target_hz)` pairs, strictly increasing in both
/// coordinates, starting at `(0, 0)` and ending at `(nyquist, nyquist)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarpMap {
    pub anchors: Vec<(f64, f64)>,
    pub nyquist_hz: f64,
    /// Factor applied to all interior targets to keep them below Nyquist;
    /// 1.0 when no rescale was needed.
    pub overflow_scale: f64,
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let last = points.len() - 1;
    let i = points[1..last].partition_point(|p| p.0 <= x);
    let (x0, y0) = points[i];
    let (x1, y1) = points[i + 1];
    if x == x0 {
        return y0;
    }
    if x == x1 {
        return y1;
    }
    y0 + (x - x0) * ((y1 - y0) / (x1 - x0))
}

impl WarpMap {
    pub fn identity(nyquist_hz: f64) -> Self {
        Self {
            anchors: vec![(0.0, 0.0), (nyquist_hz, nyquist_hz)],
            nyquist_hz,
            overflow_scale: 1.0,
        }
    }

    /// Source frequency to warped frequency.
    pub fn forward(&self, f: f64) -> f64 {
        interpolate(&self.anchors, f.clamp(0.0, self.nyquist_hz))
    }

    /// Warped frequency back to its source frequency.
    pub fn inverse(&self, g: f64) -> f64 {
        let flipped: Vec<(f64, f64)> = self.anchors.iter().map(|&(s, t)| (t, s)).collect();
        interpolate(&flipped, g.clamp(0.0, self.nyquist_hz))
    }

    /// Slope of anchor span `i` (between anchors `i` and `i + 1`).
    pub fn slope(&self, i: usize) -> f64 {
        let (s0, t0) = self.anchors[i];
        let (s1, t1) = self.anchors[i + 1];
        (t1 - t0) / (s1 - s0)
    }

    pub fn is_identity(&self) -> bool {
        self.anchors.iter().all(|(s, t)| s == t)
    }

    /// Both coordinates strictly increasing with fixed endpoints.
    pub fn is_valid(&self) -> bool {
        let n = self.anchors.len();
        n >= 2
            && self.anchors[0] == (0.0, 0.0)
            && self.anchors[n - 1] == (self.nyquist_hz, self.nyquist_hz)
            && self
                .anchors
                .windows(2)
                .all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1)
    }

    /// Warped positions of the segment boundaries `b1..bK`.
    pub fn warped_boundaries(&self, segments: &SegmentMap) -> Vec<f64> {
        segments.boundaries_hz[1..]
            .iter()
            .map(|&b| self.forward(b))
            .collect()
    }
}

/// Builds the cumulative segment map: segment `k` keeps slope `1 / alpha_k`
/// and starts where segment `k - 1` ended; the band above `f_hi` is
/// compressed linearly onto what is left below Nyquist.
pub fn build_warp_map(
    segments: &SegmentMap,
    factors: &WarpFactors,
    nyquist_hz: f64,
) -> Result<WarpMap, AugmentError> {
    let b = &segments.boundaries_hz;
    let k = segments.segment_count;
    if b.len() != k + 1 || k == 0 || b[0] != 0.0 {
        return Err(AugmentError::BadSegments(
            "boundary count does not match segment count".into(),
        ));
    }
    if b.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AugmentError::BadSegments(
            "boundaries not strictly increasing".into(),
        ));
    }
    if !(segments.f_hi_hz < nyquist_hz) {
        return Err(AugmentError::BadSegments(format!(
            "f_hi {} not below nyquist {nyquist_hz}",
            segments.f_hi_hz
        )));
    }
    if let Some(a) = (0..k)
        .map(|i| factors.alpha(i))
        .find(|a| !(*a > 0.0 && a.is_finite()))
    {
        return Err(AugmentError::BadFactor(a));
    }

    let mut targets = Vec::with_capacity(k);
    let mut t = 0.0;
    for i in 0..k {
        t += (b[i + 1] - b[i]) / factors.alpha(i);
        targets.push(t);
    }
    let mut overflow_scale = 1.0;
    if t >= nyquist_hz {
        overflow_scale = OVERFLOW_TARGET_FRACTION * nyquist_hz / t;
        for t in &mut targets {
            *t *= overflow_scale;
        }
    }

    let anchors = std::iter::once((0.0, 0.0))
        .chain(b[1..].iter().copied().zip(targets))
        .chain(std::iter::once((nyquist_hz, nyquist_hz)))
        .collect();
    Ok(WarpMap {
        anchors,
        nyquist_hz,
        overflow_scale,
    })
}

/// Resamples an envelope through a warp: output bin at `g` takes the input
/// value at `map.inverse(g)`.
pub fn apply_warp(env: &SpectralEnvelope, map: &WarpMap) -> SpectralEnvelope {
    if map.is_identity() {
        return env.clone();
    }
    let flipped: Vec<(f64, f64)> = map.anchors.iter().map(|&(s, t)| (t, s)).collect();
    let magnitudes = env
        .frequencies()
        .map(|g| env.value_at(interpolate(&flipped, g.clamp(0.0, map.nyquist_hz))))
        .collect();
    env.with_magnitudes(magnitudes)
}

/// Scales each warped segment by its energy factor. Bins at or above the
/// last warped boundary take the last segment's factor.
pub fn apply_fep(
    env: &SpectralEnvelope,
    segments: &SegmentMap,
    map: &WarpMap,
    factors: &WarpFactors,
) -> SpectralEnvelope {
    let edges = map.warped_boundaries(segments);
    let last = segments.segment_count - 1;
    let magnitudes = env
        .frequencies()
        .zip(&env.magnitudes)
        .map(|(g, m)| {
            let k = edges.partition_point(|&e| e <= g).min(last);
            m * factors.beta(k)
        })
        .collect();
    env.with_magnitudes(magnitudes)
}

/// Modified envelope times residual, bin by bin.
pub fn reconstruct_spectrum(
    modified: &SpectralEnvelope,
    residual: &[f64],
) -> Result<Vec<f64>, AugmentError> {
    if modified.len() != residual.len() {
        return Err(AugmentError::BinMismatch {
            expected: modified.len(),
            got: residual.len(),
        });
    }
    Ok(modified
        .magnitudes
        .iter()
        .zip(residual)
        .map(|(e, r)| e * r)
        .collect())
}
