//! Empirical disk-count and pair-correlation tables of white-noise zero
//! patterns next to their closed-form values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{Rect, RegionOfInterest, UHPPoint};
use crate::grid::TimeScaleGrid;
use crate::index::ZeroIndex;
use crate::stats::estimators::{pcf_margin, PcfWorkspace};
use crate::stats::reference::ReferenceStats;

/// Radius at which `μ_r = 5` for `α = 300`; the standard radii are simple
/// fractions of it.
pub fn unit_radius() -> f64 {
    (5.0f64 / 305.0).sqrt()
}

/// Disk radii `r₁`, ring radii `r₀` and ring half-width `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefaultRadii {
    pub r1: Vec<f64>,
    pub r0: Vec<f64>,
    pub h: f64,
}

impl DefaultRadii {
    /// r₁ ≈ {0.0768, 0.1024, 0.1280, 0.1536, 0.1793},
    /// r₀ ≈ {0.0427, 0.0854, 0.1280}, h ≈ 0.0427.
    pub fn standard() -> Self {
        let u = unit_radius();
        Self {
            r1: (3..=7).map(|k| k as f64 * u / 5.0).collect(),
            r0: (1..=3).map(|j| j as f64 * u / 3.0).collect(),
            h: u / 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |r: &f64| *r > 0.0 && *r < 1.0;
        if self.r1.is_empty() || self.r0.is_empty() || !self.r1.iter().all(ok) || !self.r0.iter().all(ok) {
            return Err(domain("radii must be non-empty and in (0,1)"));
        }
        if self.r1.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("r1 radii must be strictly increasing"));
        }
        let r0_min = self.r0.iter().copied().fold(f64::INFINITY, f64::min);
        if !(self.h > 0.0 && self.h <= r0_min) || self.r0.iter().any(|r| r + self.h >= 1.0) {
            return Err(domain(format!("need 0 < h <= min r0 and r0 + h < 1, got h = {}", self.h)));
        }
        Ok(())
    }

    pub fn r1_max(&self) -> f64 {
        self.r1.iter().copied().fold(0.0, f64::max)
    }

    pub fn r0_max(&self) -> f64 {
        self.r0.iter().copied().fold(0.0, f64::max)
    }

    /// Standoff that keeps every disk and ring of a center inside the
    /// observation window.
    pub fn roi_margin(&self) -> f64 {
        pcf_margin(self.r1_max(), self.r0_max(), self.h)
    }
}

/// Closed-form values at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub r: f64,
    pub mu: f64,
    pub sigma2: f64,
    pub g: f64,
    /// `g̃(r, h)`, absent when `r < h` or `r + h ≥ 1`.
    pub g_tilde: Option<f64>,
}

pub fn reference_table(stats: &ReferenceStats, radii: &[f64], h: f64) -> Result<Vec<ReferenceRow>> {
    radii
        .iter()
        .map(|&r| {
            Ok(ReferenceRow {
                r,
                mu: stats.mu(r)?,
                sigma2: stats.sigma2(r)?,
                g: stats.g(r)?,
                g_tilde: (h <= r && r + h < 1.0).then(|| stats.g_tilde(r, h)).transpose()?,
            })
        })
        .collect()
}

/// Sample mean and variance of disk counts against `μ_r` and `σ²_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub r1: f64,
    pub mu: f64,
    pub mu_hat: f64,
    pub sigma2: f64,
    pub sigma2_hat: f64,
    pub n_centers: u64,
}

/// Sample mean and standard deviation of `ĝ` over centers with a non-empty
/// disk, against `g(r₀)` and `g̃(r₀, h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcfRow {
    pub r0: f64,
    pub r1: f64,
    pub g: f64,
    pub g_tilde: f64,
    pub mean_g_hat: f64,
    pub sd_g_hat: f64,
    pub n_centers: u64,
}

/// Running sums over centers, mergeable across rows and realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct TableAccumulator {
    radii: DefaultRadii,
    alpha: f64,
    n_centers: u64,
    count_sum: Vec<u64>,
    count_sumsq: Vec<u64>,
    /// per r₁: centers with a non-empty disk
    g_n: Vec<u64>,
    /// `[ℓ * K₀ + k]`
    g_sum: Vec<f64>,
    g_sumsq: Vec<f64>,
}

impl TableAccumulator {
    pub fn new(radii: DefaultRadii, alpha: f64) -> Result<Self> {
        radii.validate()?;
        let (k1, k0) = (radii.r1.len(), radii.r0.len());
        Ok(Self {
            alpha,
            n_centers: 0,
            count_sum: vec![0; k1],
            count_sumsq: vec![0; k1],
            g_n: vec![0; k1],
            g_sum: vec![0.0; k1 * k0],
            g_sumsq: vec![0.0; k1 * k0],
            radii,
        })
    }

    fn empty_like(&self) -> Self {
        Self::new(self.radii.clone(), self.alpha).expect("validated")
    }

    pub fn n_centers(&self) -> u64 {
        self.n_centers
    }

    pub fn merge(&mut self, other: &Self) {
        self.n_centers += other.n_centers;
        let add_u = |a: &mut [u64], b: &[u64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        let add_f = |a: &mut [f64], b: &[f64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add_u(&mut self.count_sum, &other.count_sum);
        add_u(&mut self.count_sumsq, &other.count_sumsq);
        add_u(&mut self.g_n, &other.g_n);
        add_f(&mut self.g_sum, &other.g_sum);
        add_f(&mut self.g_sumsq, &other.g_sumsq);
    }

    /// Adds every grid point of `grid` whose disks and rings fit inside
    /// `window`. `zeros` must be the complete pattern on `window`.
    pub fn add_pattern(&mut self, zeros: &[UHPPoint], grid: &TimeScaleGrid, window: &Rect) -> Result<()> {
        let ws = PcfWorkspace::new(ZeroIndex::new(zeros), &self.radii.r0, self.radii.h, self.alpha)?;
        let roi = RegionOfInterest::new(*window, self.radii.roi_margin())?;
        let rows = roi.grid_rows(grid);
        let part = rows
            .par_iter()
            .map(|(j, range)| {
                let y = grid.scales()[*j];
                let mut acc = self.empty_like();
                let mut counts = vec![0u32; self.radii.r1.len()];
                let mut sums = vec![0u32; self.radii.r1.len() * self.radii.r0.len()];
                for &x in &grid.times()[range.clone()] {
                    ws.accumulate(UHPPoint { x, y }, &self.radii.r1, &mut counts, &mut sums);
                    acc.add_center(&ws, &counts, &sums);
                }
                acc
            })
            .collect::<Vec<_>>();
        // sequential merge keeps floating-point sums reproducible
        for acc in &part {
            self.merge(acc);
        }
        Ok(())
    }

    fn add_center(&mut self, ws: &PcfWorkspace, counts: &[u32], sums: &[u32]) {
        let k0 = self.radii.r0.len();
        self.n_centers += 1;
        for (l, &c) in counts.iter().enumerate() {
            let c64 = c as u64;
            self.count_sum[l] += c64;
            self.count_sumsq[l] += c64 * c64;
            if c == 0 {
                continue;
            }
            self.g_n[l] += 1;
            for k in 0..k0 {
                let g = ws.normalizers()[k] * sums[l * k0 + k] as f64 / c as f64;
                self.g_sum[l * k0 + k] += g;
                self.g_sumsq[l * k0 + k] += g * g;
            }
        }
    }

    /// Disk counts (one row per r₁). Variances use the `n - 1` divisor.
    pub fn count_rows(&self, stats: &ReferenceStats) -> Result<Vec<CountRow>> {
        let n = self.n_centers as f64;
        self.radii
            .r1
            .iter()
            .enumerate()
            .map(|(l, &r1)| {
                let (mean, var) = mean_var(n, self.count_sum[l] as f64, self.count_sumsq[l] as f64);
                Ok(CountRow {
                    r1,
                    mu: stats.mu(r1)?,
                    mu_hat: mean,
                    sigma2: stats.sigma2(r1)?,
                    sigma2_hat: var,
                    n_centers: self.n_centers,
                })
            })
            .collect()
    }

    /// Pair-correlation estimates, ordered by r₀ then r₁.
    pub fn pcf_rows(&self, stats: &ReferenceStats) -> Result<Vec<PcfRow>> {
        let k0 = self.radii.r0.len();
        let mut out = Vec::new();
        for (k, &r0) in self.radii.r0.iter().enumerate() {
            let g = stats.g(r0)?;
            let g_tilde = stats.g_tilde(r0, self.radii.h)?;
            for (l, &r1) in self.radii.r1.iter().enumerate() {
                let i = l * k0 + k;
                let (mean, var) = mean_var(self.g_n[l] as f64, self.g_sum[i], self.g_sumsq[i]);
                out.push(PcfRow {
                    r0,
                    r1,
                    g,
                    g_tilde,
                    mean_g_hat: mean,
                    sd_g_hat: var.sqrt(),
                    n_centers: self.g_n[l],
                });
            }
        }
        Ok(out)
    }
}

fn mean_var(n: f64, sum: f64, sumsq: f64) -> (f64, f64) {
    if n < 1.0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = sum / n;
    let var = if n > 1.0 {
        ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        f64::NAN
    };
    (mean, var)
}
