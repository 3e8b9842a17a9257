//! Forward and inverse continuous wavelet transform on a time-scale grid.
//!
//! Both directions work per scale in the frequency domain with circular
//! convolution. The analyzing wavelet is normalized to unit L² norm at every
//! scale, so discrete white noise with variance `T_s` per sample yields a
//! scalogram with unit variance at every pixel.
//!
//! Sample values are treated as the noise functional applied to one sampling
//! interval, i.e. `W[x, y] = Σ_ℓ s[ℓ] · conj(ψ_{x,y}(ℓ T_s))`. A coarsened
//! noise (see [`crate::signal::refine_noise`]) therefore approximates the same
//! continuous transform as the fine one.
//!
//! Circular boundaries contaminate a margin of roughly
//! [`CwtOptions::contaminated_margin`] around both ends of every row; the
//! region-of-interest machinery excludes it.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::TimeScaleGrid;
use crate::signal::{NoiseKind, SignalBuffer};
use crate::wavelet::WaveletParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    UnitL2PerScale,
}

/// Tuning knobs for the transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CwtOptions {
    /// Scales whose effective support `2·t_eff·y` exceeds this multiple of
    /// the signal duration are rejected.
    pub max_support_ratio: f64,
    /// Relative modulus defining the effective support `t_eff`.
    pub support_threshold: f64,
    /// Upper bound on the contaminated margin in units of scale.
    pub max_margin_factor: f64,
}

impl Default for CwtOptions {
    fn default() -> Self {
        Self {
            max_support_ratio: 1.0,
            support_threshold: 1e-4,
            max_margin_factor: 6.0,
        }
    }
}

impl CwtOptions {
    /// Margin (seconds) at each end of the row for scale `y` that circular
    /// wrap-around may contaminate: `min(max_margin_factor, t_eff)·y`.
    pub fn contaminated_margin(&self, params: &WaveletParams, scale: f64) -> f64 {
        params
            .effective_half_support(self.support_threshold)
            .min(self.max_margin_factor)
            * scale
    }
}

/// Complex wavelet coefficients on a [`TimeScaleGrid`], indexed `[scale][time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalogram {
    grid: TimeScaleGrid,
    values: Vec<Complex64>,
    params: WaveletParams,
    normalization: Normalization,
    source: SourceInfo,
}

/// Sampling of the analyzed signal, kept so the transform can be inverted.
#[derive(Debug, Clone, PartialEq)]
struct SourceInfo {
    len: usize,
    sample_interval: f64,
    origin_time: f64,
    kind: NoiseKind,
    /// Sample index of every grid time.
    sample_index: Vec<usize>,
}

impl Scalogram {
    pub fn grid(&self) -> &TimeScaleGrid {
        &self.grid
    }

    pub fn params(&self) -> &WaveletParams {
        &self.params
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn n_scales(&self) -> usize {
        self.grid.n_scales()
    }

    pub fn n_times(&self) -> usize {
        self.grid.n_times()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn row(&self, scale_index: usize) -> &[Complex64] {
        let n = self.n_times();
        &self.values[scale_index * n..(scale_index + 1) * n]
    }

    #[inline]
    pub fn get(&self, scale_index: usize, time_index: usize) -> Complex64 {
        self.values[scale_index * self.n_times() + time_index]
    }

    pub fn source_kind(&self) -> NoiseKind {
        self.source.kind
    }

    pub fn sample_interval(&self) -> f64 {
        self.source.sample_interval
    }

    pub fn source_len(&self) -> usize {
        self.source.len
    }

    /// Modulus matrix, same layout as [`Self::values`].
    pub fn modulus(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Copy with every coefficient multiplied by `factor[scale][time]`.
    pub fn pointwise_scaled(&self, factor: &[f64]) -> Result<Self> {
        if factor.len() != self.values.len() {
            return Err(Error::GridMismatch(format!(
                "factor has {} entries, scalogram {}",
                factor.len(),
                self.values.len()
            )));
        }
        let values = self.values.iter().zip(factor).map(|(v, f)| v * *f).collect();
        Ok(Self { values, ..self.clone() })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    /// Replaces the coefficient matrix; used to construct test inputs.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != self.values.len() || values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("replacement values must match the grid and be finite"));
        }
        Ok(Self { values, ..self.clone() })
    }

    /// Builds a scalogram from raw values on a grid that is not tied to a
    /// signal. Such a scalogram cannot be inverted.
    pub fn from_raw(grid: TimeScaleGrid, values: Vec<Complex64>, params: WaveletParams) -> Result<Self> {
        if values.len() != grid.n_times() * grid.n_scales() {
            return Err(invalid(format!(
                "expected {}x{} values, got {}",
                grid.n_scales(),
                grid.n_times(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("scalogram values must be finite"));
        }
        Ok(Self {
            grid,
            values,
            params,
            normalization: Normalization::UnitL2PerScale,
            source: SourceInfo {
                len: 0,
                sample_interval: 0.0,
                origin_time: 0.0,
                kind: NoiseKind::Complex,
                sample_index: Vec::new(),
            },
        })
    }
}

fn fft_pair(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

/// Per-scale frequency response `√y·ψ̂(yξ_k)/(‖ψ‖·T_s)` at DFT bin `k`.
fn scale_filter(params: &WaveletParams, scale: f64, n: usize, dt: f64) -> Vec<f64> {
    let dxi = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let gain = scale.sqrt() / dt;
    (0..n)
        .map(|k| {
            // bins at and above n/2 carry negative frequencies
            if 2 * k >= n {
                0.0
            } else {
                gain * params.freq_unchecked(scale * dxi * k as f64)
            }
        })
        .collect()
}

fn map_times_to_samples(signal: &SignalBuffer, grid: &TimeScaleGrid) -> Result<Vec<usize>> {
    let dt = signal.sample_interval();
    grid.times()
        .iter()
        .map(|&t| {
            let pos = (t - signal.origin_time()) / dt;
            let idx = pos.round();
            if (pos - idx).abs() > 1e-6 || idx < 0.0 || idx as usize >= signal.len() {
                Err(Error::GridMismatch(format!(
                    "grid time {t} is not a sample time of the signal"
                )))
            } else {
                Ok(idx as usize)
            }
        })
        .collect()
}

/// Forward transform of `signal` on `grid`.
pub fn forward_cwt(
    signal: &SignalBuffer,
    params: &WaveletParams,
    grid: &TimeScaleGrid,
    options: &CwtOptions,
) -> Result<Scalogram> {
    if signal.len() < 2 {
        return Err(invalid("signal needs at least two samples"));
    }
    let sample_index = map_times_to_samples(signal, grid)?;
    let t_eff = params.effective_half_support(options.support_threshold);
    let duration = signal.duration();
    for &y in grid.scales() {
        if 2.0 * t_eff * y > options.max_support_ratio * duration {
            return Err(invalid(format!(
                "scale {y} has effective support {:.4} s, beyond {} x the signal duration {duration} s",
                2.0 * t_eff * y,
                options.max_support_ratio
            )));
        }
    }

    let n = signal.len();
    let dt = signal.sample_interval();
    let (fwd, inv) = fft_pair(n);
    let mut spectrum = signal.samples().to_vec();
    fwd.process(&mut spectrum);
    let inv_n = 1.0 / n as f64;

    let rows: Vec<Vec<Complex64>> = grid
        .scales()
        .par_iter()
        .map(|&y| {
            let filter = scale_filter(params, y, n, dt);
            let mut buf: Vec<Complex64> = spectrum.iter().zip(&filter).map(|(s, h)| s * (h * inv_n)).collect();
            inv.process(&mut buf);
            sample_index.iter().map(|&i| buf[i]).collect()
        })
        .collect();

    Ok(Scalogram {
        grid: grid.clone(),
        values: rows.concat(),
        params: *params,
        normalization: Normalization::UnitL2PerScale,
        source: SourceInfo {
            len: n,
            sample_interval: dt,
            origin_time: signal.origin_time(),
            kind: signal.kind(),
            sample_index,
        },
    })
}

/// Minimum number of scales accepted by [`inverse_cwt`].
pub const MIN_RECONSTRUCTION_SCALES: usize = 8;

/// Riemann-sum inversion with hyperbolic weights `Δx·Δy_j / y_j²`.
///
/// Returns the analytic reconstruction for complex sources and twice its real
/// part for real sources.
pub fn inverse_cwt(scalogram: &Scalogram) -> Result<SignalBuffer> {
    let grid = scalogram.grid();
    if grid.n_scales() < MIN_RECONSTRUCTION_SCALES {
        return Err(invalid(format!(
            "reconstruction needs at least {MIN_RECONSTRUCTION_SCALES} scales, got {}",
            grid.n_scales()
        )));
    }
    let src = &scalogram.source;
    if src.len == 0 {
        return Err(invalid("scalogram is not tied to a sampled signal"));
    }
    let stride = match src.sample_index.as_slice() {
        [a, b, ..] => b - a,
        _ => return Err(invalid("reconstruction needs at least two grid times")),
    };
    if src.sample_index.windows(2).any(|w| w[1] - w[0] != stride) {
        return Err(invalid("reconstruction needs uniformly spaced grid times"));
    }

    let n = src.len;
    let dt = src.sample_interval;
    let params = scalogram.params();
    let dx = stride as f64 * dt;
    let log_ratio = grid.scale_ratio().ln();
    let (fwd, inv) = fft_pair(n);

    let acc = (0..grid.n_scales())
        .into_par_iter()
        .fold(
            || vec![Complex64::new(0.0, 0.0); n],
            |mut acc, j| {
                let y = grid.scales()[j];
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                for (v, &i) in scalogram.row(j).iter().zip(&src.sample_index) {
                    buf[i] = *v;
                }
                fwd.process(&mut buf);
                let filter = scale_filter(params, y, n, dt);
                // Δy_j / y_j² = ln(ratio) / y_j on a geometric ladder
                let w = dx * log_ratio / (y * params.admissibility());
                for ((a, b), h) in acc.iter_mut().zip(&buf).zip(&filter) {
                    *a += b * (h * w);
                }
                acc
            },
        )
        .reduce(
            || vec![Complex64::new(0.0, 0.0); n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );

    let mut out = acc;
    inv.process(&mut out);
    // DFT normalization 1/n, and the sample convention contributes T_s
    let scale = dt / n as f64;
    let samples: Vec<Complex64> = match src.kind {
        NoiseKind::Complex => out.iter().map(|v| v * scale).collect(),
        NoiseKind::Real => out.iter().map(|v| Complex64::new(2.0 * v.re * scale, 0.0)).collect(),
    };
    SignalBuffer::new(samples, dt, src.origin_time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::geometric_scales;
    use crate::signal::{generate_white_noise, NoiseKind};

    fn small_setup(n: usize) -> (SignalBuffer, WaveletParams, TimeScaleGrid) {
        let params = WaveletParams::new(30.0).unwrap();
        let dt = 1e-3;
        let sig = generate_white_noise(n, dt, NoiseKind::Complex, 11).unwrap();
        let scales = geometric_scales(0.02, 8, 12).unwrap();
        let grid = TimeScaleGrid::for_signal(&sig, 1, scales).unwrap();
        (sig, params, grid)
    }

    #[test]
    fn zero_signal_gives_zero_scalogram() {
        let (sig, params, grid) = small_setup(512);
        let zero = sig.scaled(0.0);
        let s = forward_cwt(&zero, &params, &grid, &CwtOptions::default()).unwrap();
        assert!(s.values().iter().all(|v| v.norm() == 0.0));
        let back = inverse_cwt(&s).unwrap();
        assert!(back.samples().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn linearity_to_machine_precision() {
        let (a, params, grid) = small_setup(1024);
        let b = generate_white_noise(1024, 1e-3, NoiseKind::Complex, 12).unwrap();
        let ca = Complex64::new(1.5, -0.25);
        let cb = Complex64::new(-0.7, 2.0);
        let mix = a.linear_combination(ca, &b, cb).unwrap();
        let opts = CwtOptions::default();
        let wa = forward_cwt(&a, &params, &grid, &opts).unwrap();
        let wb = forward_cwt(&b, &params, &grid, &opts).unwrap();
        let wm = forward_cwt(&mix, &params, &grid, &opts).unwrap();
        let peak = wm.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for ((x, y), z) in wa.values().iter().zip(wb.values()).zip(wm.values()) {
            assert!((ca * x + cb * y - z).norm() <= 1e-12 * peak);
        }
    }

    #[test]
    fn impulse_response_matches_direct_sum() {
        // direct time-domain evaluation of Σ_ℓ s[ℓ]·conj(ψ_{x,y}(ℓT))
        let params = WaveletParams::new(30.0).unwrap();
        let dt = 1e-3;
        let n = 2048;
        let t0 = 1024;
        let mut samples = vec![0.0; n];
        samples[t0] = 1.0;
        let sig = SignalBuffer::from_real(&samples, dt, 0.0).unwrap();
        let scales = geometric_scales(0.01, 8, 24).unwrap();
        let grid = TimeScaleGrid::for_signal(&sig, 4, scales.clone()).unwrap();
        let s = forward_cwt(&sig, &params, &grid, &CwtOptions::default()).unwrap();
        let mut worst = 0.0f64;
        for j in 6..18 {
            let y = scales[j];
            for (k, &x) in grid.times().iter().enumerate() {
                let direct = params.time((t0 as f64 * dt - x) / y).conj() / y.sqrt();
                let got = s.get(j, k);
                let peak = params.time(0.0).norm() / y.sqrt();
                worst = worst.max((got - direct).norm() / peak);
                assert!(((got.norm() - direct.norm()) / peak).abs() < 1e-3);
            }
        }
        assert!(worst < 1e-3, "worst {worst}");
    }

    #[test]
    fn white_noise_variance_is_scale_uniform() {
        let params = WaveletParams::new(30.0).unwrap();
        let dt = 1e-3;
        let n = 4096;
        let scales = geometric_scales(0.01, 4, 16).unwrap();
        let mut sums = vec![0.0; scales.len()];
        let seeds = 100;
        for seed in 0..seeds {
            let sig = generate_white_noise(n, dt, NoiseKind::Complex, seed).unwrap();
            let grid = TimeScaleGrid::for_signal(&sig, 8, scales.clone()).unwrap();
            let s = forward_cwt(&sig, &params, &grid, &CwtOptions::default()).unwrap();
            for (j, sum) in sums.iter_mut().enumerate() {
                *sum += s.row(j).iter().map(|v| v.norm_sqr()).sum::<f64>() / s.n_times() as f64;
            }
        }
        for (j, sum) in sums.iter().enumerate().take(12).skip(4) {
            let var = sum / seeds as f64;
            assert!((var - 1.0).abs() < 0.02, "scale {j}: {var}");
        }
    }

    #[test]
    fn shift_covariance() {
        let params = WaveletParams::new(30.0).unwrap();
        let dt = 1e-3;
        let n = 4096;
        let sig = generate_white_noise(n, dt, NoiseKind::Complex, 3).unwrap();
        let m = 37;
        let mut shifted = sig.samples().to_vec();
        shifted.rotate_right(m);
        let sh = SignalBuffer::new(shifted, dt, 0.0).unwrap();
        let scales = geometric_scales(0.005, 8, 16).unwrap();
        let grid = TimeScaleGrid::for_signal(&sig, 1, scales).unwrap();
        let a = forward_cwt(&sig, &params, &grid, &CwtOptions::default()).unwrap();
        let b = forward_cwt(&sh, &params, &grid, &CwtOptions::default()).unwrap();
        for j in 0..a.n_scales() {
            for k in 500..3000 {
                assert!((a.get(j, k) - b.get(j, k + m)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_oversized_scales_and_off_lattice_grids() {
        let (sig, params, _) = small_setup(256);
        let big = TimeScaleGrid::for_signal(&sig, 1, vec![10.0]).unwrap();
        assert!(forward_cwt(&sig, &params, &big, &CwtOptions::default()).is_err());
        let off = TimeScaleGrid::new(vec![0.0005, 0.0015], vec![0.02]).unwrap();
        assert!(forward_cwt(&sig, &params, &off, &CwtOptions::default()).is_err());
        let one = SignalBuffer::from_real(&[1.0], 1e-3, 0.0).unwrap();
        let g = TimeScaleGrid::new(vec![0.0], vec![0.001]).unwrap();
        assert!(forward_cwt(&one, &params, &g, &CwtOptions::default()).is_err());
    }

    #[test]
    fn inverse_needs_enough_scales() {
        let params = WaveletParams::new(30.0).unwrap();
        let sig = generate_white_noise(512, 1e-3, NoiseKind::Real, 1).unwrap();
        let grid = TimeScaleGrid::for_signal(&sig, 1, geometric_scales(0.01, 8, 7).unwrap()).unwrap();
        let s = forward_cwt(&sig, &params, &grid, &CwtOptions::default()).unwrap();
        assert!(inverse_cwt(&s).is_err());
    }

    #[test]
    fn identity_mask_gives_identical_reconstruction() {
        let (sig, params, grid) = small_setup(512);
        let s = forward_cwt(&sig, &params, &grid, &CwtOptions::default()).unwrap();
        let masked = s.pointwise_scaled(&vec![1.0; s.values().len()]).unwrap();
        assert_eq!(inverse_cwt(&s).unwrap(), inverse_cwt(&masked).unwrap());
    }
}
