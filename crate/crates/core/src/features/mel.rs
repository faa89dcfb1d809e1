use std::ops::Range;

use super::FeatureError;

/// Lower bound applied to filter power before the log.
pub const LOG_FLOOR: f64 = 1e-10;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters uniformly spaced on the mel scale from 0 Hz to Nyquist.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    pub n_filters: usize,
    pub n_bins: usize,
    pub sample_rate: u32,
    pub mel_low_hz: f64,
    pub mel_high_hz: f64,
    /// Edge frequencies: filter `i` rises from `edges_hz[i]`, peaks at
    /// `edges_hz[i + 1]` and falls to zero at `edges_hz[i + 2]`.
    pub edges_hz: Vec<f64>,
    /// `n_filters x n_bins`.
    pub weights: Vec<Vec<f64>>,
    support: Vec<Range<usize>>,
}

impl MelFilterbank {
    pub fn new(n_filters: usize, n_bins: usize, sample_rate: u32) -> Result<Self, FeatureError> {
        if n_filters == 0 || n_bins < n_filters + 2 || sample_rate == 0 {
            return Err(FeatureError::BadFilterbank { n_filters, n_bins });
        }
        let nyquist = f64::from(sample_rate) / 2.0;
        let bin_hz = nyquist / (n_bins - 1) as f64;
        let (mel_lo, mel_hi) = (hz_to_mel(0.0), hz_to_mel(nyquist));
        let edges_hz: Vec<f64> = (0..n_filters + 2)
            .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_filters + 1) as f64))
            .collect();

        let weights: Vec<Vec<f64>> = edges_hz
            .windows(3)
            .map(|e| {
                let (l, c, r) = (e[0], e[1], e[2]);
                (0..n_bins)
                    .map(|k| {
                        let f = k as f64 * bin_hz;
                        let w = ((f - l) / (c - l)).min((r - f) / (r - c));
                        w.max(0.0)
                    })
                    .collect()
            })
            .collect();
        let support = weights
            .iter()
            .map(|row| {
                let start = row.iter().position(|&w| w > 0.0).unwrap_or(0);
                let end = row.iter().rposition(|&w| w > 0.0).map_or(start, |i| i + 1);
                start..end
            })
            .collect();

        Ok(Self {
            n_filters,
            n_bins,
            sample_rate,
            mel_low_hz: 0.0,
            mel_high_hz: nyquist,
            edges_hz,
            weights,
            support,
        })
    }

    pub fn center_hz(&self, i: usize) -> f64 {
        self.edges_hz[i + 1]
    }

    /// Bins with non-zero weight for filter `i`.
    pub fn support(&self, i: usize) -> Range<usize> {
        self.support[i].clone()
    }
}

pub fn build_mel_filterbank(
    n_filters: usize,
    n_bins: usize,
    sample_rate: u32,
) -> Result<MelFilterbank, FeatureError> {
    MelFilterbank::new(n_filters, n_bins, sample_rate)
}

/// `ln(max(sum_k w[i][k] * s[k]^2, floor))` per filter.
pub fn apply_filterbank(spectrum: &[f64], fb: &MelFilterbank) -> Result<Vec<f64>, FeatureError> {
    if spectrum.len() != fb.n_bins {
        return Err(FeatureError::BinMismatch {
            expected: fb.n_bins,
            got: spectrum.len(),
        });
    }
    Ok(fb
        .weights
        .iter()
        .zip(&fb.support)
        .map(|(row, range)| {
            let power: f64 = row[range.clone()]
                .iter()
                .zip(&spectrum[range.clone()])
                .map(|(w, s)| w * s * s)
                .sum();
            power.max(LOG_FLOOR).ln()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mel_scale_round_trip() {
        for hz in [0.0, 100.0, 1000.0, 8000.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
        assert!((hz_to_mel(1000.0) - 1000.0).abs() < 0.1);
    }

    #[test]
    fn single_filter_peaks_at_mel_midpoint() {
        let fb = MelFilterbank::new(1, 257, 16000).unwrap();
        let mid = mel_to_hz(hz_to_mel(8000.0) / 2.0);
        assert!((fb.center_hz(0) - mid).abs() < 1e-9);
        let peak = fb.weights[0]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!((peak as f64 * 31.25 - mid).abs() <= 31.25);
    }

    #[test]
    fn adjacent_filters_cross_over_between_centers() {
        let fb = MelFilterbank::new(20, 257, 16000).unwrap();
        for i in 0..19 {
            // filter i+1 starts rising at filter i's center and peaks where filter i reaches zero
            assert_eq!(fb.edges_hz[i + 1], fb.center_hz(i));
            assert_eq!(fb.edges_hz[i + 2], fb.center_hz(i + 1));
            for k in 0..257 {
                let f = k as f64 * 31.25;
                if f >= fb.center_hz(i) && f <= fb.center_hz(i + 1) {
                    let sum = fb.weights[i][k] + fb.weights[i + 1][k];
                    assert!(
                        (sum - 1.0).abs() < 1e-12,
                        "filters {i},{} at bin {k}",
                        i + 1
                    );
                }
            }
        }
    }

    #[test]
    fn rows_are_contiguous_and_ascending() {
        let fb = MelFilterbank::new(80, 257, 16000).unwrap();
        let mut last_peak = 0.0;
        for (i, row) in fb.weights.iter().enumerate() {
            let support = fb.support(i);
            assert!(!support.is_empty(), "filter {i} is empty");
            assert!(row[support.clone()].iter().all(|&w| w > 0.0));
            assert!(row.iter().all(|&w| w >= 0.0));
            assert!(fb.center_hz(i) > last_peak);
            last_peak = fb.center_hz(i);
        }
    }

    #[test]
    fn flat_spectrum_gives_row_sums() {
        let fb = MelFilterbank::new(40, 257, 16000).unwrap();
        let out = apply_filterbank(&[1.0; 257], &fb).unwrap();
        for (o, row) in out.iter().zip(&fb.weights) {
            assert!((o - row.iter().sum::<f64>().ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_spectrum_hits_floor() {
        let fb = MelFilterbank::new(40, 257, 16000).unwrap();
        let out = apply_filterbank(&[0.0; 257], &fb).unwrap();
        assert!(out.iter().all(|&v| v == LOG_FLOOR.ln()));
    }

    #[test]
    fn scaling_shifts_log_energy() {
        let fb = MelFilterbank::new(40, 257, 16000).unwrap();
        let s: Vec<f64> = (0..257)
            .map(|k| 1.0 + (k as f64 * 0.37).sin().abs())
            .collect();
        let c = 3.7;
        let base = apply_filterbank(&s, &fb).unwrap();
        let scaled = apply_filterbank(&s.iter().map(|v| v * c).collect::<Vec<_>>(), &fb).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            assert!((b - a - 2.0 * c.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_sizes() {
        assert!(MelFilterbank::new(0, 257, 16000).is_err());
        assert!(MelFilterbank::new(80, 81, 16000).is_err());
        let fb = MelFilterbank::new(10, 257, 16000).unwrap();
        assert!(apply_filterbank(&[0.0; 256], &fb).is_err());
    }

    #[test]
    fn construction_is_pure() {
        assert_eq!(
            MelFilterbank::new(80, 257, 16000).unwrap(),
            MelFilterbank::new(80, 257, 16000).unwrap()
        );
    }
}
