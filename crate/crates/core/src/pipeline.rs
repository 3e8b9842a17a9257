//! Signal → scalogram → zeros, with the observation window in which the zero
//! pattern can be trusted.

use serde::{Deserialize, Serialize};

use crate::cwt::{forward_cwt, CwtOptions, Scalogram};
use crate::error::Result;
use crate::geometry::Rect;
use crate::grid::{GridSpec, TimeScaleGrid};
use crate::index::ZeroIndex;
use crate::signal::{generate_white_noise, NoiseKind, SignalBuffer};
use crate::wavelet::WaveletParams;
use crate::zeros::{extract_zeros, Neighborhood, ZeroSet};

/// Default upper analysis frequency as a fraction of the sample rate. Keeps
/// the wavelet's spectral tail well below Nyquist at α = 300.
pub const DEFAULT_F_MAX_RATIO: f64 = 0.35;
/// Default number of octaves below the upper frequency.
pub const DEFAULT_OCTAVES: f64 = 4.0;
/// Coarser ladders bias disk counts: zeros snap to rows, and at 16 voices the
/// mean count in a disk is off by several percent.
pub const DEFAULT_VOICES: usize = 64;

/// Everything needed to turn a signal into a zero pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub alpha: f64,
    pub grid: GridSpec,
    pub cwt: CwtOptions,
    pub neighborhood: Neighborhood,
}

impl AnalysisConfig {
    pub fn new(alpha: f64, grid: GridSpec) -> Result<Self> {
        WaveletParams::new(alpha)?;
        Ok(Self {
            alpha,
            grid,
            cwt: CwtOptions::default(),
            neighborhood: Neighborhood::Four,
        })
    }

    /// `voices` per octave over `DEFAULT_OCTAVES` octaves ending at
    /// `DEFAULT_F_MAX_RATIO · sample_rate`.
    pub fn standard(alpha: f64, sample_rate: f64, voices: usize) -> Result<Self> {
        let params = WaveletParams::new(alpha)?;
        let f_hi = DEFAULT_F_MAX_RATIO * sample_rate;
        let f_lo = f_hi / DEFAULT_OCTAVES.exp2();
        Self::new(alpha, GridSpec::from_frequency_range(&params, sample_rate, f_lo, f_hi, voices)?)
    }

    pub fn params(&self) -> WaveletParams {
        WaveletParams::new(self.alpha).expect("alpha validated at construction")
    }

    /// Rectangle where the transform is free of wrap-around: the grid
    /// coverage shortened at both ends by the contaminated margin of the
    /// largest scale.
    pub fn observation_window(&self, grid: &TimeScaleGrid) -> Result<Rect> {
        let cover = Rect::grid_coverage(grid);
        let m = self.cwt.contaminated_margin(&self.params(), cover.y_max);
        Rect::new(cover.t_min + m, cover.t_max - m, cover.y_min, cover.y_max)
    }
}

/// Transform, zeros and trusted window of one signal.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub scalogram: Scalogram,
    pub zeros: ZeroSet,
    pub window: Rect,
}

impl Analysis {
    pub fn grid(&self) -> &TimeScaleGrid {
        self.scalogram.grid()
    }

    pub fn index(&self) -> ZeroIndex {
        ZeroIndex::new(self.zeros.points())
    }
}

pub fn analyze(signal: &SignalBuffer, config: &AnalysisConfig) -> Result<Analysis> {
    let grid = config.grid.build(signal)?;
    let window = config.observation_window(&grid)?;
    let scalogram = forward_cwt(signal, &config.params(), &grid, &config.cwt)?;
    let zeros = extract_zeros(&scalogram, config.neighborhood)?;
    Ok(Analysis {
        scalogram,
        zeros,
        window,
    })
}

/// Zero pattern of one white-noise realization of `length` samples.
pub fn analyze_white_noise(config: &AnalysisConfig, length: usize, kind: NoiseKind, seed: u64) -> Result<Analysis> {
    let noise = generate_white_noise(length, 1.0 / config.grid.sample_rate, kind, seed)?;
    analyze(&noise, config)
}
