//! Masks from local deviations of the zero pattern against white noise.
//!
//! Two statistics are evaluated at every time-scale point `w` of the region
//! of interest:
//!
//! - intensity: `Σ_k (|Z ∩ D(w, r_k)| - μ_{r_k})² / (K σ²_{r_k})`,
//! - pair correlation: `Σ_{k,ℓ} a_{kℓ} (g̃(r_{0,k}, h) - ĝ_{w,r_{1,ℓ},h}(r_{0,k}))² / (K₀ K₁)`,
//!
//! and turned into masks by `min(max(a·q - b, 0), 1)`. Thresholds `b` come
//! from white-noise quantiles, see [`calibrate`].

mod calibrate;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use calibrate::{MIN_POOLED_CENTERS};
pub use calibrate::{calibrate, quantile, CalibrationProfile, CalibrationSettings, PROFILE_SCHEMA_VERSION};

use crate::cwt::Scalogram;
use crate::error::{domain, Error, Result};
use crate::geometry::{Rect, RegionOfInterest, UHPPoint};
use crate::grid::TimeScaleGrid;
use crate::index::ZeroIndex;
use crate::pipeline::Analysis;
use crate::stats::estimators::{pcf_margin, PcfWorkspace};
use crate::stats::reference::{corrected_pcf, count_variance, expected_count};
use crate::tables::DefaultRadii;

const SIGMA2_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskKind {
    Intensity,
    Pcf,
    Combined,
}

impl MaskKind {
    pub const ALL: [MaskKind; 3] = [MaskKind::Intensity, MaskKind::Pcf, MaskKind::Combined];
}

/// What an empty center disk contributes to the pair-correlation statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyDiskPolicy {
    /// `ĝ = 0`, the largest possible shortfall: holes are rare in noise.
    #[default]
    MaxDeviation,
    /// The `(k, ℓ)` terms of an empty disk are left out of the sum.
    Skip,
}

/// Radii, gains and thresholds of the three masks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskConfig {
    /// Intensity radii `r_k`.
    pub radii_r: Vec<f64>,
    pub radii_r0: Vec<f64>,
    pub radii_r1: Vec<f64>,
    pub h: f64,
    /// Gain of the intensity statistic.
    pub a: f64,
    pub b_intensity: f64,
    pub b_pcf: f64,
    pub b_combined: f64,
    /// `a_kl[k][ℓ]`, indexed by r₀ then r₁.
    pub a_kl: Vec<Vec<f64>>,
    #[serde(default)]
    pub empty_disk: EmptyDiskPolicy,
}

impl MaskConfig {
    /// Standard radii, unit gains and zero thresholds; calibration fills in
    /// `a_kl` and the thresholds.
    pub fn standard() -> Self {
        let d = DefaultRadii::standard();
        Self::from_radii(&d, d.r1.clone())
    }

    pub fn from_radii(pcf: &DefaultRadii, radii_r: Vec<f64>) -> Self {
        Self {
            radii_r,
            a_kl: vec![vec![1.0; pcf.r1.len()]; pcf.r0.len()],
            radii_r0: pcf.r0.clone(),
            radii_r1: pcf.r1.clone(),
            h: pcf.h,
            a: 1.0,
            b_intensity: 0.0,
            b_pcf: 0.0,
            b_combined: 0.0,
            empty_disk: EmptyDiskPolicy::MaxDeviation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: &[f64]| !v.is_empty() && v.iter().all(|r| *r > 0.0 && *r < 1.0);
        if !in_unit(&self.radii_r) || !in_unit(&self.radii_r0) || !in_unit(&self.radii_r1) {
            return Err(domain("mask radii must be non-empty and in (0,1)"));
        }
        let r0_min = self.radii_r0.iter().copied().fold(f64::INFINITY, f64::min);
        if !(self.h > 0.0 && self.h <= r0_min) || self.radii_r0.iter().any(|r| r + self.h >= 1.0) {
            return Err(domain(format!("need 0 < h <= min r0 and r0 + h < 1, got h = {}", self.h)));
        }
        if !(self.a > 0.0) {
            return Err(domain("gain a must be positive"));
        }
        if [self.b_intensity, self.b_pcf, self.b_combined].iter().any(|b| !(*b >= 0.0)) {
            return Err(domain("thresholds must be non-negative"));
        }
        if self.a_kl.len() != self.radii_r0.len()
            || self.a_kl.iter().any(|row| row.len() != self.radii_r1.len() || row.iter().any(|a| !(*a > 0.0) || !a.is_finite()))
        {
            return Err(domain("a_kl must be a positive K0 x K1 matrix"));
        }
        Ok(())
    }

    pub fn pcf_radii(&self) -> DefaultRadii {
        DefaultRadii {
            r1: self.radii_r1.clone(),
            r0: self.radii_r0.clone(),
            h: self.h,
        }
    }

    pub fn threshold(&self, kind: MaskKind) -> f64 {
        match kind {
            MaskKind::Intensity => self.b_intensity,
            MaskKind::Pcf => self.b_pcf,
            MaskKind::Combined => self.b_combined,
        }
    }

    pub fn intensity_margin(&self) -> f64 {
        self.radii_r.iter().copied().fold(0.0, f64::max)
    }

    pub fn pcf_margin(&self) -> f64 {
        let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        pcf_margin(max(&self.radii_r1), max(&self.radii_r0), self.h)
    }

    /// Standoff used for every mask kind, so that all three share one region
    /// of interest.
    pub fn roi_margin(&self) -> f64 {
        self.intensity_margin().max(self.pcf_margin())
    }
}

fn outside_roi(w: &UHPPoint, margin: f64) -> Error {
    Error::OutsideRoi(format!("({}, {}) is closer than {margin} to the window boundary", w.x, w.y))
}

/// `Σ_k (|Z ∩ D(w, r_k)| - μ_{r_k})² / (K σ²_{r_k})` for the pattern in
/// `zeros`. With `window`, `w` must keep all disks inside it.
pub fn intensity_statistic(
    zeros: &ZeroIndex,
    w: UHPPoint,
    radii: &[f64],
    alpha: f64,
    window: Option<&Rect>,
) -> Result<f64> {
    let mut config = MaskConfig::standard();
    config.radii_r = radii.to_vec();
    config.validate()?;
    if let Some(window) = window {
        let margin = config.intensity_margin();
        if !RegionOfInterest::new(*window, margin)?.contains(&w) {
            return Err(outside_roi(&w, margin));
        }
    }
    let mut total = 0.0;
    for &r in radii {
        let disk = crate::geometry::PHDisk::new(w, r)?;
        let d = zeros.count_in_disk(&disk) as f64 - expected_count(alpha, r)?;
        total += d * d / count_variance(alpha, r, SIGMA2_TOL)?;
    }
    Ok(total / radii.len() as f64)
}

/// `Σ_{k,ℓ} a_{kℓ} (g̃(r_{0,k}, h) - ĝ_{w₁,r_{1,ℓ},h}(r_{0,k}))² / (K₀K₁)`.
///
/// An empty center disk counts as `ĝ = 0` (a hole is itself evidence against
/// white noise) unless `config.empty_disk` says to skip it.
pub fn pcf_statistic(
    zeros: &ZeroIndex,
    w1: UHPPoint,
    config: &MaskConfig,
    alpha: f64,
    window: Option<&Rect>,
) -> Result<f64> {
    config.validate()?;
    if let Some(window) = window {
        let margin = config.pcf_margin();
        if !RegionOfInterest::new(*window, margin)?.contains(&w1) {
            return Err(outside_roi(&w1, margin));
        }
    }
    let k0 = config.radii_r0.len();
    let mut total = 0.0;
    for (l, &r1) in config.radii_r1.iter().enumerate() {
        let disk = crate::geometry::PHDisk::new(w1, r1)?;
        let mut members = Vec::new();
        zeros.for_each_in_disk(&disk, |id, _| members.push(id));
        if members.is_empty() && config.empty_disk == EmptyDiskPolicy::Skip {
            continue;
        }
        for k in 0..k0 {
            let r0 = config.radii_r0[k];
            let target = corrected_pcf(alpha, r0, config.h)?;
            let g_hat = if members.is_empty() {
                0.0
            } else {
                let lo = (r0 - config.h).max(0.0);
                let hi = r0 + config.h;
                let s: usize = members.iter().map(|&m| zeros.ring_count(m, lo, hi)).sum();
                crate::stats::estimators::pcf_normalizer(alpha, r0, config.h) * s as f64 / members.len() as f64
            };
            let d = target - g_hat;
            total += config.a_kl[k][l] * d * d;
        }
    }
    Ok(total / (k0 * config.radii_r1.len()) as f64)
}

/// Per-center evaluation of both statistics from one nested disk query.
#[derive(Debug, Clone)]
pub struct StatisticEvaluator {
    ws: PcfWorkspace,
    config: MaskConfig,
    /// ascending union of intensity and center radii
    radii: Vec<f64>,
    pos_r: Vec<usize>,
    pos_r1: Vec<usize>,
    mu: Vec<f64>,
    inv_k_sigma2: Vec<f64>,
    g_tilde: Vec<f64>,
}

/// Reusable buffers for [`StatisticEvaluator`].
#[derive(Debug, Clone, Default)]
pub struct Scratch {
    counts: Vec<u32>,
    sums: Vec<u32>,
}

impl StatisticEvaluator {
    pub fn new(zeros: &[UHPPoint], config: &MaskConfig, alpha: f64) -> Result<Self> {
        config.validate()?;
        let ws = PcfWorkspace::new(ZeroIndex::new(zeros), &config.radii_r0, config.h, alpha)?;
        let mut radii: Vec<f64> = config.radii_r.iter().chain(&config.radii_r1).copied().collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let pos = |r: &f64| radii.iter().position(|x| x == r).expect("radius in union");
        let k = config.radii_r.len() as f64;
        Ok(Self {
            pos_r: config.radii_r.iter().map(pos).collect(),
            pos_r1: config.radii_r1.iter().map(pos).collect(),
            mu: config.radii_r.iter().map(|&r| expected_count(alpha, r)).collect::<Result<_>>()?,
            inv_k_sigma2: config
                .radii_r
                .iter()
                .map(|&r| count_variance(alpha, r, SIGMA2_TOL).map(|s| 1.0 / (k * s)))
                .collect::<Result<_>>()?,
            g_tilde: config
                .radii_r0
                .iter()
                .map(|&r0| corrected_pcf(alpha, r0, config.h))
                .collect::<Result<_>>()?,
            radii,
            ws,
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &MaskConfig {
        &self.config
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            counts: vec![0; self.radii.len()],
            sums: vec![0; self.radii.len() * self.config.radii_r0.len()],
        }
    }

    /// Runs the disk query for `w`; the other methods read its result.
    pub fn observe(&self, w: UHPPoint, scratch: &mut Scratch) {
        self.ws.accumulate(w, &self.radii, &mut scratch.counts, &mut scratch.sums);
    }

    pub fn intensity(&self, scratch: &Scratch) -> f64 {
        self.pos_r
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let d = scratch.counts[p] as f64 - self.mu[k];
                d * d * self.inv_k_sigma2[k]
            })
            .sum()
    }

    /// `ĝ` for `(r0[k], r1[ℓ])` at `[ℓ * K₀ + k]`; `NaN` for empty disks.
    pub fn g_hat(&self, scratch: &Scratch, out: &mut [f64]) {
        let k0 = self.config.radii_r0.len();
        for (l, &p) in self.pos_r1.iter().enumerate() {
            let c = scratch.counts[p];
            for k in 0..k0 {
                out[l * k0 + k] = if c == 0 {
                    f64::NAN
                } else {
                    self.ws.normalizers()[k] * scratch.sums[p * k0 + k] as f64 / c as f64
                };
            }
        }
    }

    pub fn pcf(&self, scratch: &Scratch) -> f64 {
        let k0 = self.config.radii_r0.len();
        let mut total = 0.0;
        for (l, &p) in self.pos_r1.iter().enumerate() {
            let c = scratch.counts[p];
            if c == 0 && self.config.empty_disk == EmptyDiskPolicy::Skip {
                continue;
            }
            for k in 0..k0 {
                let g = if c == 0 {
                    0.0
                } else {
                    self.ws.normalizers()[k] * scratch.sums[p * k0 + k] as f64 / c as f64
                };
                let d = self.g_tilde[k] - g;
                total += self.config.a_kl[k][l] * d * d;
            }
        }
        total / (k0 * self.pos_r1.len()) as f64
    }

    /// Unthresholded statistic behind a mask kind.
    pub fn statistic(&self, kind: MaskKind, scratch: &Scratch) -> f64 {
        match kind {
            MaskKind::Intensity => self.config.a * self.intensity(scratch),
            MaskKind::Pcf => self.pcf(scratch),
            MaskKind::Combined => self.intensity(scratch) + self.pcf(scratch),
        }
    }
}

/// Mask values on a time-scale grid, `[scale][time]` layout, in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    grid: TimeScaleGrid,
    values: Vec<f64>,
}

impl Mask {
    pub fn new(grid: TimeScaleGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_times() * grid.n_scales() {
            return Err(Error::GridMismatch(format!(
                "{} mask values for a {}x{} grid",
                values.len(),
                grid.n_scales(),
                grid.n_times()
            )));
        }
        Ok(Self {
            grid,
            values: values.into_iter().map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }).collect(),
        })
    }

    pub fn constant(grid: TimeScaleGrid, value: f64) -> Result<Self> {
        let n = grid.n_times() * grid.n_scales();
        Self::new(grid, vec![value; n])
    }

    pub fn grid(&self) -> &TimeScaleGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, scale_index: usize, time_index: usize) -> f64 {
        self.values[scale_index * self.grid.n_times() + time_index]
    }

    /// Fraction of grid points inside `roi` with a positive mask value.
    pub fn coverage(&self, roi: &RegionOfInterest) -> f64 {
        let (mut inside, mut on) = (0usize, 0usize);
        for (j, range) in roi.grid_rows(&self.grid) {
            let row = &self.values[j * self.grid.n_times()..(j + 1) * self.grid.n_times()];
            inside += range.len();
            on += row[range].iter().filter(|&&v| v > 0.0).count();
        }
        if inside == 0 {
            0.0
        } else {
            on as f64 / inside as f64
        }
    }

    /// Grayscale dilation: each value becomes the maximum over a
    /// `(2·time_radius + 1) × (2·scale_radius + 1)` box.
    pub fn dilated(&self, time_radius: usize, scale_radius: usize) -> Self {
        let (ns, nt) = (self.grid.n_scales(), self.grid.n_times());
        let mut horizontal = vec![0.0; self.values.len()];
        for j in 0..ns {
            for k in 0..nt {
                let lo = k.saturating_sub(time_radius);
                let hi = (k + time_radius + 1).min(nt);
                horizontal[j * nt + k] = self.values[j * nt + lo..j * nt + hi].iter().copied().fold(0.0, f64::max);
            }
        }
        let mut values = vec![0.0; self.values.len()];
        for j in 0..ns {
            let lo = j.saturating_sub(scale_radius);
            let hi = (j + scale_radius + 1).min(ns);
            for k in 0..nt {
                values[j * nt + k] = (lo..hi).map(|jj| horizontal[jj * nt + k]).fold(0.0, f64::max);
            }
        }
        Self {
            grid: self.grid.clone(),
            values,
        }
    }
}

/// Statistic of `kind` at every grid point of the region of interest; `NaN`
/// outside it.
pub fn statistic_map(
    zeros: &[UHPPoint],
    grid: &TimeScaleGrid,
    roi: &RegionOfInterest,
    kind: MaskKind,
    config: &MaskConfig,
    alpha: f64,
) -> Result<Vec<f64>> {
    let eval = StatisticEvaluator::new(zeros, config, alpha)?;
    let nt = grid.n_times();
    let mut out = vec![f64::NAN; nt * grid.n_scales()];
    let rows = roi.grid_rows(grid);
    let filled: Vec<(usize, usize, Vec<f64>)> = rows
        .par_iter()
        .map(|(j, range)| {
            let y = grid.scales()[*j];
            let mut scratch = eval.scratch();
            let vals = grid.times()[range.clone()]
                .iter()
                .map(|&x| {
                    eval.observe(UHPPoint { x, y }, &mut scratch);
                    eval.statistic(kind, &scratch)
                })
                .collect();
            (*j, range.start, vals)
        })
        .collect();
    for (j, start, vals) in filled {
        out[j * nt + start..j * nt + start + vals.len()].copy_from_slice(&vals);
    }
    Ok(out)
}

/// `min(max(q - b, 0), 1)` of the calibrated statistic over the region of
/// interest of `analysis`; zero elsewhere.
pub fn build_mask(analysis: &Analysis, kind: MaskKind, profile: &CalibrationProfile) -> Result<Mask> {
    let alpha = analysis.scalogram.params().alpha();
    if (alpha - profile.alpha).abs() > 1e-12 * profile.alpha {
        return Err(Error::GridMismatch(format!(
            "profile calibrated for alpha = {}, scalogram uses {alpha}",
            profile.alpha
        )));
    }
    profile.check_grid(analysis.grid())?;
    let roi = profile.roi(&analysis.window)?;
    let stat = statistic_map(analysis.zeros.points(), analysis.grid(), &roi, kind, &profile.config, alpha)?;
    let b = profile.config.threshold(kind);
    Mask::new(analysis.grid().clone(), stat.into_iter().map(|q| threshold(q, b)).collect())
}

/// `min(max(q - b, 0), 1)`, with `NaN` (outside the region) mapped to 0.
pub fn threshold(q: f64, b: f64) -> f64 {
    if q.is_nan() {
        0.0
    } else {
        (q - b).clamp(0.0, 1.0)
    }
}

/// Pointwise product of `scalogram` and `mask`. With `interpolate`, a mask on
/// a different grid is sampled at the nearest mask grid point; points outside
/// the mask's coverage get 0.
pub fn apply_mask(scalogram: &Scalogram, mask: &Mask, interpolate: bool) -> Result<Scalogram> {
    let grid = scalogram.grid();
    if grid.same_as(mask.grid()) {
        return scalogram.pointwise_scaled(mask.values());
    }
    if !interpolate {
        return Err(Error::GridMismatch("mask and scalogram grids differ".into()));
    }
    let cover = Rect::grid_coverage(mask.grid());
    let mut factor = Vec::with_capacity(grid.n_scales() * grid.n_times());
    for &y in grid.scales() {
        let j = mask.grid().nearest_scale_index(y);
        for &x in grid.times() {
            let z = UHPPoint { x, y };
            factor.push(if cover.contains(&z) {
                mask.get(j, mask.grid().nearest_time_index(x))
            } else {
                0.0
            });
        }
    }
    scalogram.pointwise_scaled(&factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::reference::count_variance;

    fn ladder(n: usize) -> Vec<UHPPoint> {
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..10 {
                pts.push(UHPPoint {
                    x: 0.003 * i as f64 + 0.001 * (j % 3) as f64,
                    y: 0.05 * 1.06f64.powi(j),
                });
            }
        }
        pts
    }

    #[test]
    fn intensity_statistic_algebra() {
        let r = 0.15;
        let mu = expected_count(300.0, r).unwrap();
        let sigma = count_variance(300.0, r, 1e-10).unwrap().sqrt();
        // a ring of points at fixed distance gives a controlled count
        let c = UHPPoint { x: 0.0, y: 1.0 };
        let n = (mu + sigma).round() as usize;
        let pts: Vec<UHPPoint> = (0..n).map(|i| UHPPoint { x: 0.001 * i as f64, y: 1.0 }).collect();
        let q = intensity_statistic(&ZeroIndex::new(&pts), c, &[r], 300.0, None).unwrap();
        let d = n as f64 - mu;
        assert!((q - d * d / (sigma * sigma)).abs() < 1e-12);
        let window = Rect::new(-0.1, 0.1, 0.5, 2.0).unwrap();
        assert!(matches!(
            intensity_statistic(&ZeroIndex::new(&pts), c, &[r], 300.0, Some(&window)),
            Err(Error::OutsideRoi(_))
        ));
    }

    #[test]
    fn evaluator_agrees_with_direct_statistics() {
        let pts = ladder(300);
        let cfg = MaskConfig::standard();
        let eval = StatisticEvaluator::new(&pts, &cfg, 300.0).unwrap();
        let idx = ZeroIndex::new(&pts);
        let mut s = eval.scratch();
        for i in 0..40 {
            let w = UHPPoint {
                x: 0.2 + 0.01 * i as f64,
                y: 0.06 + 0.001 * i as f64,
            };
            eval.observe(w, &mut s);
            let qi = intensity_statistic(&idx, w, &cfg.radii_r, 300.0, None).unwrap();
            let qp = pcf_statistic(&idx, w, &cfg, 300.0, None).unwrap();
            assert!((eval.intensity(&s) - qi).abs() < 1e-9 * qi.max(1.0));
            assert!((eval.pcf(&s) - qp).abs() < 1e-9 * qp.max(1.0));
        }
        // far from every zero: all disks empty
        eval.observe(UHPPoint { x: 50.0, y: 0.06 }, &mut s);
        let expected: f64 = eval.g_tilde.iter().map(|g| g * g).sum::<f64>() / 3.0;
        assert!((eval.pcf(&s) - expected).abs() < 1e-12);
        let mut skip = cfg.clone();
        skip.empty_disk = EmptyDiskPolicy::Skip;
        let eval = StatisticEvaluator::new(&pts, &skip, 300.0).unwrap();
        eval.observe(UHPPoint { x: 50.0, y: 0.06 }, &mut s);
        assert_eq!(eval.pcf(&s), 0.0);
        assert_eq!(pcf_statistic(&idx, UHPPoint { x: 50.0, y: 0.06 }, &skip, 300.0, None).unwrap(), 0.0);
    }

    #[test]
    fn thresholding_clamps_and_is_monotone() {
        assert_eq!(threshold(0.5, 1.0), 0.0);
        assert_eq!(threshold(7.0, 1.0), 1.0);
        assert_eq!(threshold(1.25, 1.0), 0.25);
        assert_eq!(threshold(f64::NAN, 0.0), 0.0);
        for q in [0.0, 0.3, 2.0, 5.5] {
            assert!(threshold(q, 2.0) <= threshold(q, 1.0));
        }
    }

    #[test]
    fn config_validation() {
        let mut c = MaskConfig::standard();
        c.validate().unwrap();
        c.h = 0.5;
        assert!(c.validate().is_err());
        let mut c = MaskConfig::standard();
        c.a_kl[0][0] = 0.0;
        assert!(c.validate().is_err());
        let mut c = MaskConfig::standard();
        c.b_pcf = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn dilation_grows_support() {
        let grid = TimeScaleGrid::new((0..5).map(f64::from).collect(), vec![1.0, 2.0, 4.0]).unwrap();
        let mut v = vec![0.0; 15];
        v[7] = 0.5;
        let m = Mask::new(grid, v).unwrap().dilated(1, 1);
        assert_eq!(m.values().iter().filter(|&&x| x == 0.5).count(), 9);
    }
}
