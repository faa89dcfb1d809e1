//! Named perturbation presets and per-utterance factor draws.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::seed::SeedRng;

/// Maximum number of spectral segments a preset supplies factors for.
pub const MAX_SEGMENTS: usize = 4;

/// Closed interval a factor is drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorRange {
    pub lo: f64,
    pub hi: f64,
}

impl FactorRange {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn fixed(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.lo..=self.hi).contains(&v)
    }

    fn draw(&self, rng: &mut SeedRng) -> f64 {
        rng.uniform(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSpec {
    /// No frequency warp.
    Identity,
    /// One draw replicated across all segments.
    Shared(FactorRange),
    /// Independent draw per segment.
    PerSegment([FactorRange; MAX_SEGMENTS]),
}

/// Which magnitude the warp is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarpTarget {
    /// Raw FFT magnitude with a single segment ending at [`VTLP_F_HI_FRACTION`] of Nyquist.
    RawSpectrum,
    /// LPC envelope; residual carries the excitation.
    LpcEnvelope,
}

/// Upper warp boundary for the raw-spectrum (VTLP) path, as a fraction of Nyquist.
pub const VTLP_F_HI_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PresetName {
    Vtlp,
    LpcWp,
    LpcSwpExp1,
    LpcSwpExp2,
    LpcSwpExp3,
    Fep,
    LpcSwpExp3Fep,
    /// All factors pinned to 1; exercises the LPC chain without changing it.
    Identity,
}

impl PresetName {
    pub const ALL: [PresetName; 8] = [
        PresetName::Vtlp,
        PresetName::LpcWp,
        PresetName::LpcSwpExp1,
        PresetName::LpcSwpExp2,
        PresetName::LpcSwpExp3,
        PresetName::Fep,
        PresetName::LpcSwpExp3Fep,
        PresetName::Identity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Vtlp => "vtlp",
            PresetName::LpcWp => "lpc-wp",
            PresetName::LpcSwpExp1 => "lpc-swp-exp1",
            PresetName::LpcSwpExp2 => "lpc-swp-exp2",
            PresetName::LpcSwpExp3 => "lpc-swp-exp3",
            PresetName::Fep => "fep",
            PresetName::LpcSwpExp3Fep => "lpc-swp-exp3+fep",
            PresetName::Identity => "identity",
        }
    }

    pub fn preset(self) -> Preset {
        Preset::from(self)
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = AugmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| AugmentError::UnknownPreset(s.to_string()))
    }
}

impl TryFrom<String> for PresetName {
    type Error = AugmentError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PresetName> for String {
    fn from(p: PresetName) -> Self {
        p.as_str().to_string()
    }
}

const WARP_0_9_1_1: FactorRange = FactorRange::new(0.9, 1.1);
const WARP_0_75_1_0: FactorRange = FactorRange::new(0.75, 1.0);
const EXP3: [FactorRange; MAX_SEGMENTS] = [
    FactorRange::new(0.6, 0.85),
    FactorRange::new(0.7, 0.85),
    FactorRange::new(0.75, 0.95),
    FactorRange::new(0.85, 1.0),
];
const ENERGY: [FactorRange; MAX_SEGMENTS] = [FactorRange::new(0.7, 1.3); MAX_SEGMENTS];

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: PresetName,
    pub alpha: AlphaSpec,
    /// Per-segment energy ranges; `None` disables energy perturbation.
    pub beta: Option<[FactorRange; MAX_SEGMENTS]>,
    pub target: WarpTarget,
}

impl From<PresetName> for Preset {
    fn from(name: PresetName) -> Self {
        let (alpha, beta, target) = match name {
            PresetName::Vtlp => (
                AlphaSpec::Shared(WARP_0_9_1_1),
                None,
                WarpTarget::RawSpectrum,
            ),
            PresetName::LpcWp => (
                AlphaSpec::Shared(WARP_0_9_1_1),
                None,
                WarpTarget::LpcEnvelope,
            ),
            PresetName::LpcSwpExp1 => (
                AlphaSpec::PerSegment([WARP_0_9_1_1; MAX_SEGMENTS]),
                None,
                WarpTarget::LpcEnvelope,
            ),
            PresetName::LpcSwpExp2 => (
                AlphaSpec::PerSegment([WARP_0_75_1_0; MAX_SEGMENTS]),
                None,
                WarpTarget::LpcEnvelope,
            ),
            PresetName::LpcSwpExp3 => (AlphaSpec::PerSegment(EXP3), None, WarpTarget::LpcEnvelope),
            PresetName::Fep => (AlphaSpec::Identity, Some(ENERGY), WarpTarget::LpcEnvelope),
            PresetName::LpcSwpExp3Fep => (
                AlphaSpec::PerSegment(EXP3),
                Some(ENERGY),
                WarpTarget::LpcEnvelope,
            ),
            PresetName::Identity => (AlphaSpec::Identity, None, WarpTarget::LpcEnvelope),
        };
        Preset {
            name,
            alpha,
            beta,
            target,
        }
    }
}

impl Preset {
    /// Range that segment `k` (0-based) of a draw must fall in.
    pub fn alpha_range(&self, k: usize) -> FactorRange {
        match &self.alpha {
            AlphaSpec::Identity => FactorRange::fixed(1.0),
            AlphaSpec::Shared(r) => *r,
            AlphaSpec::PerSegment(r) => r[k],
        }
    }

    pub fn beta_range(&self, k: usize) -> FactorRange {
        self.beta.map_or(FactorRange::fixed(1.0), |b| b[k])
    }

    pub fn has_energy_perturbation(&self) -> bool {
        self.beta.is_some()
    }

    /// Draws one factor vector. Alphas are consumed from the generator first
    /// (one value when shared, four when per-segment), then four betas.
    pub fn draw(&self, seed: u64) -> WarpFactors {
        let mut rng = SeedRng::new(seed);
        let alphas = match &self.alpha {
            AlphaSpec::Identity => vec![1.0; MAX_SEGMENTS],
            AlphaSpec::Shared(r) => vec![r.draw(&mut rng); MAX_SEGMENTS],
            AlphaSpec::PerSegment(rs) => rs.iter().map(|r| r.draw(&mut rng)).collect(),
        };
        let betas = match &self.beta {
            None => vec![1.0; MAX_SEGMENTS],
            Some(rs) => rs.iter().map(|r| r.draw(&mut rng)).collect(),
        };
        WarpFactors {
            alphas,
            betas,
            preset_name: self.name,
            rng_seed: seed,
        }
    }
}

/// Per-segment warp (`alphas`) and energy (`betas`) factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpFactors {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub preset_name: PresetName,
    pub rng_seed: u64,
}

impl WarpFactors {
    pub fn identity() -> Self {
        Self {
            alphas: vec![1.0; MAX_SEGMENTS],
            betas: vec![1.0; MAX_SEGMENTS],
            preset_name: PresetName::Identity,
            rng_seed: 0,
        }
    }

    /// Factor for segment `k`; the last value is repeated past the end.
    pub fn alpha(&self, k: usize) -> f64 {
        self.alphas[k.min(self.alphas.len() - 1)]
    }

    pub fn beta(&self, k: usize) -> f64 {
        self.betas[k.min(self.betas.len() - 1)]
    }
}

/// Draws factors for a preset given by name.
pub fn draw_factors(preset: &str, seed: u64) -> Result<WarpFactors, AugmentError> {
    Ok(preset.parse::<PresetName>()?.preset().draw(seed))
}
