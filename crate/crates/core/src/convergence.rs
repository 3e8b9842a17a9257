//! Uniform convergence of the transform of sampled noise under dyadic
//! refinement of the sampling.

use serde::{Deserialize, Serialize};

use crate::cwt::{forward_cwt, CwtOptions};
use crate::error::{domain, Result};
use crate::grid::{geometric_scales, TimeScaleGrid};
use crate::signal::{generate_white_noise, refine_noise, NoiseKind, SignalBuffer};
use crate::wavelet::WaveletParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub alpha: f64,
    /// Samples at the finest resolution.
    pub finest_len: usize,
    pub finest_interval: f64,
    /// Number of resolutions compared; yields `levels - 1` differences.
    pub levels: usize,
    /// Scales of the compact comparison set, in seconds.
    pub scales: Vec<f64>,
    /// Fraction of the duration, centered, covered by comparison times.
    pub time_fraction: f64,
    pub noise_kind: NoiseKind,
}

impl ConvergenceConfig {
    /// Four resolutions (three differences) on `8` scales spanning two
    /// octaves above `40` coarsest samples.
    pub fn standard(alpha: f64, finest_len: usize, finest_interval: f64) -> Result<Self> {
        let levels = 4;
        let coarse = finest_interval * (1u64 << (levels - 1)) as f64;
        Ok(Self {
            alpha,
            finest_len,
            finest_interval,
            levels,
            scales: geometric_scales(40.0 * coarse, 4, 9)?,
            time_fraction: 0.5,
            noise_kind: NoiseKind::Real,
        })
    }
}

/// `sup |W_{i+1} - W_i|` over the comparison grid for each pair of
/// consecutive resolutions, coarse to fine; `signal` is the finest one.
pub fn sup_differences(signal: &SignalBuffer, config: &ConvergenceConfig) -> Result<Vec<f64>> {
    if config.levels < 2 {
        return Err(domain("need at least two resolutions"));
    }
    if !(config.time_fraction > 0.0 && config.time_fraction <= 1.0) {
        return Err(domain("time fraction must be in (0,1]"));
    }
    let params = WaveletParams::new(config.alpha)?;
    // finest first
    let mut levels = vec![signal.clone()];
    for _ in 1..config.levels {
        let next = refine_noise(levels.last().expect("non-empty"))?;
        levels.push(next);
    }
    let coarsest = levels.last().expect("non-empty");
    let n = coarsest.len();
    let skip = ((1.0 - config.time_fraction) * 0.5 * n as f64).floor() as usize;
    let times: Vec<f64> = (skip..n - skip).map(|i| coarsest.time_of(i)).collect();
    let grid = TimeScaleGrid::new(times, config.scales.clone())?;
    let options = CwtOptions::default();
    let transforms = levels
        .iter()
        .rev()
        .map(|s| forward_cwt(s, &params, &grid, &options))
        .collect::<Result<Vec<_>>>()?;
    Ok(transforms
        .windows(2)
        .map(|w| {
            w[0].values()
                .iter()
                .zip(w[1].values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Mean of [`sup_differences`] over white-noise realizations `seeds`.
pub fn mean_sup_differences(config: &ConvergenceConfig, seeds: &[u64]) -> Result<Vec<f64>> {
    if seeds.is_empty() {
        return Err(domain("need at least one seed"));
    }
    let mut mean = vec![0.0; config.levels.saturating_sub(1)];
    for &seed in seeds {
        let noise = generate_white_noise(config.finest_len, config.finest_interval, config.noise_kind, seed)?;
        for (m, d) in mean.iter_mut().zip(sup_differences(&noise, config)?) {
            *m += d / seeds.len() as f64;
        }
    }
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_signal_has_no_difference() {
        let cfg = ConvergenceConfig::standard(300.0, 4096, 1e-4).unwrap();
        let zero = SignalBuffer::from_real(&vec![0.0; 4096], 1e-4, 0.0).unwrap();
        assert_eq!(sup_differences(&zero, &cfg).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn differences_shrink_with_resolution() {
        let cfg = ConvergenceConfig::standard(300.0, 8192, 1e-4).unwrap();
        let d = mean_sup_differences(&cfg, &[1, 2, 3, 4]).unwrap();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    }
}
