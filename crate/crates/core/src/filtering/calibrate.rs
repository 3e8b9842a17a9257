//! Monte-Carlo calibration of mask weights and thresholds on white noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MaskConfig, MaskKind, StatisticEvaluator};
use crate::error::{domain, Error, Result};
use crate::geometry::{Rect, RegionOfInterest, UHPPoint};
use crate::grid::{GridSpec, TimeScaleGrid};
use crate::pipeline::{analyze_white_noise, AnalysisConfig};
use crate::signal::NoiseKind;

pub const PROFILE_SCHEMA_VERSION: u32 = 1;

/// Fewest pooled centers accepted for quantile estimation.
pub const MIN_POOLED_CENTERS: usize = 1000;

/// Inputs of [`calibrate`] other than the mask radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSettings {
    pub analysis: AnalysisConfig,
    /// Samples per white-noise realization.
    pub signal_len: usize,
    pub noise_kind: NoiseKind,
    pub n_seeds: usize,
    pub quantile_level: f64,
    pub seed: u64,
    /// Only every `center_stride`-th time index of each row is pooled;
    /// neighboring centers are nearly identical.
    pub center_stride: usize,
}

impl CalibrationSettings {
    pub fn new(analysis: AnalysisConfig, signal_len: usize) -> Self {
        Self {
            analysis,
            signal_len,
            noise_kind: NoiseKind::Real,
            n_seeds: 20,
            quantile_level: 0.999,
            seed: 0,
            center_stride: 8,
        }
    }

    /// Seed of realization `i`.
    pub fn realization_seeds(&self) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.n_seeds).map(|_| rng.random()).collect()
    }
}

/// Calibrated mask configuration plus everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProfile {
    pub schema_version: u32,
    pub alpha: f64,
    pub config: MaskConfig,
    /// Standard deviations of `ĝ` on white noise, `[k][ℓ]` by r₀ then r₁.
    pub sigma_hat: Vec<Vec<f64>>,
    /// Mean of `ĝ` on white noise, same layout.
    pub mean_g_hat: Vec<Vec<f64>>,
    pub quantile_level: f64,
    pub n_seeds: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub noise_kind: NoiseKind,
    pub signal_len: usize,
    pub center_stride: usize,
    pub n_centers: usize,
}

impl CalibrationProfile {
    /// Region of interest of a pattern observed in `window`.
    pub fn roi(&self, window: &Rect) -> Result<RegionOfInterest> {
        RegionOfInterest::new(*window, self.config.roi_margin())
    }

    /// Rejects grids outside the calibrated family (same sample rate, time
    /// stride and scale ladder).
    pub fn check_grid(&self, grid: &TimeScaleGrid) -> Result<()> {
        let scales = self.grid.scales()?;
        let same_scales = scales.len() == grid.n_scales()
            && scales.iter().zip(grid.scales()).all(|(a, b)| (a - b).abs() <= 1e-9 * a);
        let dt = self.grid.time_stride as f64 / self.grid.sample_rate;
        let same_step = match grid.time_step() {
            Some(s) => (s - dt).abs() <= 1e-9 * dt,
            None => false,
        };
        if same_scales && same_step {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "grid does not belong to the calibrated family ({} scales from {} s, step {dt} s)",
                scales.len(),
                self.grid.min_scale
            )))
        }
    }

    pub fn to_json(&self) -> std::result::Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("calibration profile: {e}")))?;
        if p.schema_version != PROFILE_SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported calibration profile version {}",
                p.schema_version
            )));
        }
        p.config.validate()?;
        Ok(p)
    }
}

/// Linear-interpolation sample quantile; sorts `values`.
pub fn quantile(values: &mut [f32], level: f64) -> f64 {
    assert!(!values.is_empty());
    values.sort_unstable_by(f32::total_cmp);
    let pos = level.clamp(0.0, 1.0) * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let t = pos - lo as f64;
    values[lo] as f64 * (1.0 - t) + values[hi] as f64 * t
}

struct Realization {
    zeros: Vec<UHPPoint>,
    centers: Vec<UHPPoint>,
}

/// Fills `a_kl = 1/σ̂²` and the three thresholds from white noise.
///
/// Pass one pools `ĝ` over strided region-of-interest centers of every
/// realization and sets `σ̂`; pass two evaluates the weighted statistics and
/// takes their `quantile_level` sample quantiles. Deterministic given
/// `settings.seed`.
pub fn calibrate(settings: &CalibrationSettings, skeleton: &MaskConfig) -> Result<CalibrationProfile> {
    skeleton.validate()?;
    if settings.n_seeds == 0 {
        return Err(domain("need at least one seed"));
    }
    if !(settings.quantile_level > 0.0 && settings.quantile_level < 1.0) {
        return Err(domain("quantile level must be in (0,1)"));
    }
    if settings.center_stride == 0 {
        return Err(domain("center stride must be positive"));
    }
    let alpha = settings.analysis.alpha;
    let (k0, k1) = (skeleton.radii_r0.len(), skeleton.radii_r1.len());

    let mut runs = Vec::with_capacity(settings.n_seeds);
    for seed in settings.realization_seeds() {
        let a = analyze_white_noise(&settings.analysis, settings.signal_len, settings.noise_kind, seed)?;
        let roi = RegionOfInterest::new(a.window, skeleton.roi_margin())?;
        let grid = a.grid();
        let mut centers = Vec::new();
        for (j, range) in roi.grid_rows(grid) {
            let y = grid.scales()[j];
            centers.extend(grid.times()[range].iter().step_by(settings.center_stride).map(|&x| UHPPoint { x, y }));
        }
        runs.push(Realization {
            zeros: a.zeros.points().to_vec(),
            centers,
        });
    }
    let n_centers: usize = runs.iter().map(|r| r.centers.len()).sum();
    if n_centers < MIN_POOLED_CENTERS {
        return Err(Error::Calibration(format!(
            "only {n_centers} valid centers pooled over {} realizations, need {MIN_POOLED_CENTERS}; \
             use longer signals, more seeds or a smaller center stride",
            settings.n_seeds
        )));
    }

    // pass one: moments of ĝ per (r₀, r₁)
    let mut n = vec![0u64; k0 * k1];
    let mut sum = vec![0.0; k0 * k1];
    let mut sumsq = vec![0.0; k0 * k1];
    for run in &runs {
        let eval = StatisticEvaluator::new(&run.zeros, skeleton, alpha)?;
        let parts: Vec<(Vec<u64>, Vec<f64>, Vec<f64>)> = run
            .centers
            .par_chunks(4096)
            .map(|chunk| {
                let mut s = eval.scratch();
                let mut g = vec![0.0; k0 * k1];
                let mut acc = (vec![0u64; k0 * k1], vec![0.0; k0 * k1], vec![0.0; k0 * k1]);
                for &w in chunk {
                    eval.observe(w, &mut s);
                    eval.g_hat(&s, &mut g);
                    for (i, &v) in g.iter().enumerate() {
                        if !v.is_nan() {
                            acc.0[i] += 1;
                            acc.1[i] += v;
                            acc.2[i] += v * v;
                        }
                    }
                }
                acc
            })
            .collect();
        for (pn, ps, pq) in parts {
            for i in 0..k0 * k1 {
                n[i] += pn[i];
                sum[i] += ps[i];
                sumsq[i] += pq[i];
            }
        }
    }
    let mut sigma_hat = vec![vec![0.0; k1]; k0];
    let mut mean_g_hat = vec![vec![0.0; k1]; k0];
    for l in 0..k1 {
        for k in 0..k0 {
            let i = l * k0 + k;
            let m = n[i] as f64;
            if m < 2.0 {
                return Err(Error::Calibration(format!(
                    "too few non-empty disks of radius {} to estimate the spread of the pair correlation",
                    skeleton.radii_r1[l]
                )));
            }
            let mean = sum[i] / m;
            let var = (sumsq[i] - m * mean * mean) / (m - 1.0);
            if !(var > 0.0) {
                return Err(Error::Calibration(format!(
                    "degenerate pair-correlation spread at r0 = {}, r1 = {}",
                    skeleton.radii_r0[k], skeleton.radii_r1[l]
                )));
            }
            sigma_hat[k][l] = var.sqrt();
            mean_g_hat[k][l] = mean;
        }
    }

    // pass two: weighted statistics
    let mut config = skeleton.clone();
    config.a_kl = sigma_hat.iter().map(|row| row.iter().map(|s| 1.0 / (s * s)).collect()).collect();
    config.b_intensity = 0.0;
    config.b_pcf = 0.0;
    config.b_combined = 0.0;
    let mut stats: [Vec<f32>; 3] = Default::default();
    for run in &runs {
        let eval = StatisticEvaluator::new(&run.zeros, &config, alpha)?;
        let parts: Vec<[Vec<f32>; 3]> = run
            .centers
            .par_chunks(4096)
            .map(|chunk| {
                let mut s = eval.scratch();
                let mut out: [Vec<f32>; 3] = Default::default();
                for &w in chunk {
                    eval.observe(w, &mut s);
                    for (o, kind) in out.iter_mut().zip(MaskKind::ALL) {
                        o.push(eval.statistic(kind, &s) as f32);
                    }
                }
                out
            })
            .collect();
        for part in parts {
            for (dst, src) in stats.iter_mut().zip(part) {
                dst.extend(src);
            }
        }
    }
    let [mut qi, mut qp, mut qc] = stats;
    config.b_intensity = quantile(&mut qi, settings.quantile_level);
    config.b_pcf = quantile(&mut qp, settings.quantile_level);
    config.b_combined = quantile(&mut qc, settings.quantile_level);

    Ok(CalibrationProfile {
        schema_version: PROFILE_SCHEMA_VERSION,
        alpha,
        config,
        sigma_hat,
        mean_g_hat,
        quantile_level: settings.quantile_level,
        n_seeds: settings.n_seeds,
        seed: settings.seed,
        grid: settings.analysis.grid.clone(),
        noise_kind: settings.noise_kind,
        signal_len: settings.signal_len,
        center_stride: settings.center_stride,
        n_centers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_interpolates() {
        let mut v = vec![3.0f32, 1.0, 2.0, 4.0];
        assert_eq!(quantile(&mut v, 0.0), 1.0);
        assert_eq!(quantile(&mut v, 1.0), 4.0);
        assert!((quantile(&mut v, 0.5) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn refuses_tiny_calibration() {
        let analysis = AnalysisConfig::standard(300.0, 8000.0, 8).unwrap();
        let mut s = CalibrationSettings::new(analysis, 4000);
        s.n_seeds = 1;
        s.center_stride = 1000;
        let r = calibrate(&s, &MaskConfig::standard());
        assert!(matches!(r, Err(Error::Calibration(_))), "{r:?}");
    }
}
