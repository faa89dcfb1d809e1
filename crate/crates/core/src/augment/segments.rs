//! Envelope segmentation at valleys.

use serde::Serialize;

use crate::spectrum::SpectralEnvelope;

/// Minimum valley depth, in dB, relative to the lower of its flanking peaks.
pub const VALLEY_PROMINENCE_DB: f64 = 1.0;
/// Upper boundary used when the envelope has too few valleys.
pub const FALLBACK_F_HI_FRACTION: f64 = 0.9;

/// Frequency bands of an envelope, split at its valleys.
///
/// `boundaries_hz` is `[0, b1, ..., bK]` with `bK == f_hi_hz`; segment `k`
/// (1-based) spans `[b(k-1), b(k))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentMap {
    pub valleys_hz: Vec<f64>,
    pub boundaries_hz: Vec<f64>,
    pub segment_count: usize,
    pub f_hi_hz: f64,
}

impl SegmentMap {
    /// One segment `[0, f_hi)`.
    pub fn single(f_hi_hz: f64) -> Self {
        Self {
            valleys_hz: Vec::new(),
            boundaries_hz: vec![0.0, f_hi_hz],
            segment_count: 1,
            f_hi_hz,
        }
    }

    /// 0-based segment index of a frequency, or `None` at or above `f_hi`.
    pub fn segment_of(&self, freq_hz: f64) -> Option<usize> {
        if !(0.0..self.f_hi_hz).contains(&freq_hz) {
            return None;
        }
        Some(self.boundaries_hz[1..].partition_point(|&b| b <= freq_hz))
    }
}

/// Strict local minima of `y` whose prominence reaches `min_prominence`.
///
/// Prominence is measured the usual way for peaks, mirrored: walk outwards
/// from the minimum until the signal drops below it (or the edge), take the
/// highest point on each side, and subtract the minimum from the lower one.
pub fn valleys(y: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = y.len();
    let ceiling = |range: &mut dyn Iterator<Item = usize>, floor: f64| {
        let mut top = floor;
        for j in range {
            if y[j] < floor {
                break;
            }
            top = top.max(y[j]);
        }
        top
    };
    (1..n.saturating_sub(1))
        .filter(|&i| y[i] < y[i - 1] && y[i] < y[i + 1])
        .filter(|&i| {
            let left = ceiling(&mut (0..i).rev(), y[i]);
            let right = ceiling(&mut (i + 1..n), y[i]);
            left.min(right) - y[i] >= min_prominence
        })
        .collect()
}

/// Splits an envelope into at most `max_segments` bands bounded by valleys.
pub fn detect_segments(env: &SpectralEnvelope, max_segments: usize) -> SegmentMap {
    detect_segments_with(env, max_segments, VALLEY_PROMINENCE_DB)
}

pub fn detect_segments_with(
    env: &SpectralEnvelope,
    max_segments: usize,
    prominence_db: f64,
) -> SegmentMap {
    let max_segments = max_segments.max(1);
    let valleys_hz: Vec<f64> = valleys(&env.to_db(), prominence_db)
        .into_iter()
        .map(|i| env.frequency(i))
        .collect();

    let (interior, f_hi_hz) = if valleys_hz.len() >= max_segments {
        (
            &valleys_hz[..max_segments - 1],
            valleys_hz[max_segments - 1],
        )
    } else {
        let f_hi = FALLBACK_F_HI_FRACTION * env.nyquist_hz;
        let usable = valleys_hz.partition_point(|&v| v < f_hi);
        (&valleys_hz[..usable], f_hi)
    };

    let boundaries_hz: Vec<f64> = std::iter::once(0.0)
        .chain(interior.iter().copied())
        .chain(std::iter::once(f_hi_hz))
        .collect();
    SegmentMap {
        segment_count: boundaries_hz.len() - 1,
        valleys_hz,
        boundaries_hz,
        f_hi_hz,
    }
}
