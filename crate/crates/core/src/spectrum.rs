/// Non-negative magnitudes on a uniform grid from 0 Hz to Nyquist.
///
/// Used for LPC envelopes as well as raw FFT magnitudes; bin `k` sits at
/// `k * bin_hz` and the last bin sits at `nyquist_hz`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEnvelope {
    pub magnitudes: Vec<f64>,
    pub bin_hz: f64,
    pub nyquist_hz: f64,
}

impl SpectralEnvelope {
    /// # Panics
    /// Panics on fewer than two bins.
    pub fn new(magnitudes: Vec<f64>, sample_rate: u32) -> Self {
        assert!(magnitudes.len() >= 2, "envelope needs at least two bins");
        let nyquist_hz = f64::from(sample_rate) / 2.0;
        Self {
            bin_hz: nyquist_hz / (magnitudes.len() - 1) as f64,
            magnitudes,
            nyquist_hz,
        }
    }

    pub fn with_magnitudes(&self, magnitudes: Vec<f64>) -> Self {
        debug_assert_eq!(magnitudes.len(), self.magnitudes.len());
        Self {
            magnitudes,
            ..*self
        }
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.frequency(k))
    }

    /// Linear interpolation between bins, clamped to `[0, nyquist]`.
    /// Positions within 1e-9 bin of a grid point return that bin exactly.
    pub fn value_at(&self, freq_hz: f64) -> f64 {
        let last = self.len() - 1;
        let pos = (freq_hz / self.bin_hz).clamp(0.0, last as f64);
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-9 {
            return self.magnitudes[nearest as usize];
        }
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(last);
        let t = pos - lo as f64;
        self.magnitudes[lo] * (1.0 - t) + self.magnitudes[hi] * t
    }

    /// `20 log10` of the magnitudes, floored at -300 dB.
    pub fn to_db(&self) -> Vec<f64> {
        self.magnitudes
            .iter()
            .map(|m| 20.0 * m.max(1e-15).log10())
            .collect()
    }

    pub fn argmax(&self) -> usize {
        self.magnitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i)
    }
}
