//! Local estimators of first intensity and pair correlation.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{ph_triangle_bound, PHDisk, Rect, RegionOfInterest, UHPPoint};
use crate::index::ZeroIndex;
use crate::stats::reference::{expected_count, ReferenceStats};

/// `ρ̂ = |Z ∩ D|·(1 - r₁²) / (4π r₁² v₁²)` for the disk `D = D_ph(w₁, r₁)`,
/// `w₁ = u₁ + i v₁`.
pub fn estimate_local_intensity(zeros: &ZeroIndex, disk: &PHDisk) -> f64 {
    intensity_from_count(zeros.count_in_disk(disk), disk)
}

pub(crate) fn intensity_from_count(count: usize, disk: &PHDisk) -> f64 {
    let r2 = disk.radius * disk.radius;
    let v = disk.center.y;
    count as f64 * (1.0 - r2) / (4.0 * PI * r2 * v * v)
}

/// Local pair-correlation estimate around one center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PCFEstimate {
    pub center: UHPPoint,
    pub r1: f64,
    pub h: f64,
    pub r0_values: Vec<f64>,
    pub g_hat: Vec<f64>,
    /// `|Z ∩ D(w₁, r₁)|`
    pub n_center: usize,
}

/// Normalization `(1 - r₀²)² / (4 α h r₀)` of the ring count.
pub(crate) fn pcf_normalizer(alpha: f64, r0: f64, h: f64) -> f64 {
    let s = 1.0 - r0 * r0;
    s * s / (4.0 * alpha * h * r0)
}

fn check_pcf_args(r1: f64, r0_values: &[f64], h: f64, alpha: f64) -> Result<()> {
    if !(alpha > 1.0) {
        return Err(domain(format!("alpha must be > 1, got {alpha}")));
    }
    if !(r1 > 0.0 && r1 < 1.0) {
        return Err(domain(format!("r1 must be in (0,1), got {r1}")));
    }
    if r0_values.is_empty() {
        return Err(domain("need at least one r0"));
    }
    for &r0 in r0_values {
        if !(h > 0.0 && h <= r0 && r0 + h < 1.0) {
            return Err(domain(format!("need 0 < h <= r0 and r0 + h < 1, got r0 = {r0}, h = {h}")));
        }
    }
    Ok(())
}

/// Margin a center needs inside the trusted window so that every ring around
/// every zero of its disk stays inside the window.
pub fn pcf_margin(r1: f64, r0_max: f64, h: f64) -> f64 {
    ph_triangle_bound(r1, r0_max + h)
}

/// `ĝ_{w₁,r₁}(r₀) = (1-r₀²)²/(4αh r₀) · Σ_{w ∈ Z∩D(w₁,r₁)} #{z ≠ w : |d_ph(z,w) - r₀| < h} / |Z∩D(w₁,r₁)|`.
///
/// `coverage`, when given, is the window in which the zero pattern is
/// complete; centers whose rings could leave it are rejected.
pub fn estimate_pcf(
    zeros: &ZeroIndex,
    center: UHPPoint,
    r1: f64,
    r0_values: &[f64],
    h: f64,
    alpha: f64,
    coverage: Option<&Rect>,
) -> Result<PCFEstimate> {
    check_pcf_args(r1, r0_values, h, alpha)?;
    let r0_max = r0_values.iter().copied().fold(0.0, f64::max);
    if let Some(window) = coverage {
        let roi = RegionOfInterest::new(*window, pcf_margin(r1, r0_max, h))?;
        if !roi.contains(&center) {
            return Err(Error::OutsideRoi(format!(
                "rings of radius {} around D({:?}, {r1}) leave the covered window",
                r0_max + h,
                center
            )));
        }
    }
    let disk = PHDisk::new(center, r1)?;
    let mut members = Vec::new();
    zeros.for_each_in_disk(&disk, |id, _| members.push(id));
    if members.is_empty() {
        return Err(Error::EmptyDisk {
            x: center.x,
            y: center.y,
            radius: r1,
        });
    }
    let g_hat = r0_values
        .iter()
        .map(|&r0| {
            let lo = (r0 - h).max(0.0);
            let total: usize = members.iter().map(|&w| zeros.ring_count(w, lo, r0 + h)).sum();
            pcf_normalizer(alpha, r0, h) * total as f64 / members.len() as f64
        })
        .collect();
    Ok(PCFEstimate {
        center,
        r1,
        h,
        r0_values: r0_values.to_vec(),
        g_hat,
        n_center: members.len(),
    })
}

/// Bulk estimator: ring counts of every zero are computed once, so a center
/// only needs one disk query.
#[derive(Debug, Clone)]
pub struct PcfWorkspace {
    index: ZeroIndex,
    r0_values: Vec<f64>,
    h: f64,
    normalizers: Vec<f64>,
    /// `ring_counts[id * K0 + k]`
    ring_counts: Vec<u32>,
}

impl PcfWorkspace {
    pub fn new(index: ZeroIndex, r0_values: &[f64], h: f64, alpha: f64) -> Result<Self> {
        check_pcf_args(0.5, r0_values, h, alpha)?;
        let k0 = r0_values.len();
        let ring_counts: Vec<u32> = (0..index.len())
            .into_par_iter()
            .flat_map_iter(|id| {
                let index = &index;
                r0_values
                    .iter()
                    .map(move |&r0| index.ring_count(id, (r0 - h).max(0.0), r0 + h) as u32)
            })
            .collect();
        debug_assert_eq!(ring_counts.len(), index.len() * k0);
        Ok(Self {
            normalizers: r0_values.iter().map(|&r0| pcf_normalizer(alpha, r0, h)).collect(),
            index,
            r0_values: r0_values.to_vec(),
            h,
            ring_counts,
        })
    }

    pub fn index(&self) -> &ZeroIndex {
        &self.index
    }

    pub fn r0_values(&self) -> &[f64] {
        &self.r0_values
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Ring count of zero `id` for `r0_values[k]`.
    pub fn ring_count(&self, id: usize, k: usize) -> u32 {
        self.ring_counts[id * self.r0_values.len() + k]
    }

    /// Accumulates, for nested radii `r1s` (ascending), the disk counts and
    /// ring-count sums around `center`. `counts[ℓ]` and
    /// `sums[ℓ * K0 + k]` are overwritten.
    pub fn accumulate(&self, center: UHPPoint, r1s: &[f64], counts: &mut [u32], sums: &mut [u32]) {
        let k0 = self.r0_values.len();
        counts.iter_mut().for_each(|c| *c = 0);
        sums.iter_mut().for_each(|c| *c = 0);
        let Some(&r_max) = r1s.last() else { return };
        let Ok(disk) = PHDisk::new(center, r_max) else { return };
        self.index.for_each_in_disk(&disk, |id, d2| {
            let rc = &self.ring_counts[id * k0..(id + 1) * k0];
            for (l, &r1) in r1s.iter().enumerate().rev() {
                if d2 >= r1 * r1 {
                    break;
                }
                counts[l] += 1;
                for (k, &c) in rc.iter().enumerate() {
                    sums[l * k0 + k] += c;
                }
            }
        });
    }

    /// Same estimate as [`estimate_pcf`], without coverage checking.
    pub fn estimate(&self, center: UHPPoint, r1: f64) -> Result<PCFEstimate> {
        let k0 = self.r0_values.len();
        let mut counts = [0u32];
        let mut sums = vec![0u32; k0];
        self.accumulate(center, &[r1], &mut counts, &mut sums);
        if counts[0] == 0 {
            return Err(Error::EmptyDisk {
                x: center.x,
                y: center.y,
                radius: r1,
            });
        }
        Ok(PCFEstimate {
            center,
            r1,
            h: self.h,
            r0_values: self.r0_values.clone(),
            g_hat: self.g_hat_from(counts[0], &sums),
            n_center: counts[0] as usize,
        })
    }

    /// `ĝ` per `r0` from a disk count and its ring sums.
    pub fn g_hat_from(&self, count: u32, sums: &[u32]) -> Vec<f64> {
        sums.iter()
            .zip(&self.normalizers)
            .map(|(&s, &norm)| norm * s as f64 / count as f64)
            .collect()
    }

    pub fn normalizers(&self) -> &[f64] {
        &self.normalizers
    }
}

/// Outcome of the pre-registered Chebyshev deviation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevOutcome {
    /// `||Z ∩ D_k| - μ_k| / σ_k`
    pub z_scores: Vec<f64>,
    pub flags: Vec<bool>,
    /// `Σ_k 1/δ_k²`, an upper bound on the probability under white noise
    /// that any disk is flagged.
    pub union_bound: f64,
}

impl ChebyshevOutcome {
    pub fn any_flagged(&self) -> bool {
        self.flags.iter().any(|&f| f)
    }
}

/// Flags disk `k` when its count deviates from `μ_{r_k}` by at least
/// `δ_k·σ_{r_k}`. Disks and deviations must be chosen before looking at the
/// data for the bound to hold.
pub fn chebyshev_deviation_test(
    zeros: &ZeroIndex,
    disks: &[PHDisk],
    deltas: &[f64],
    reference: &ReferenceStats,
) -> Result<ChebyshevOutcome> {
    if disks.len() != deltas.len() {
        return Err(domain(format!("{} disks but {} deviations", disks.len(), deltas.len())));
    }
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(domain("deviations must be positive"));
    }
    let mut z_scores = Vec::with_capacity(disks.len());
    for d in disks {
        let mu = expected_count(reference.alpha(), d.radius)?;
        let sigma = reference.sigma2(d.radius)?.sqrt();
        z_scores.push((zeros.count_in_disk(d) as f64 - mu).abs() / sigma);
    }
    Ok(evaluate_chebyshev(z_scores, deltas))
}

pub(crate) fn evaluate_chebyshev(z_scores: Vec<f64>, deltas: &[f64]) -> ChebyshevOutcome {
    let flags = z_scores.iter().zip(deltas).map(|(z, d)| z >= d).collect();
    let union_bound = deltas.iter().map(|d| 1.0 / (d * d)).sum();
    ChebyshevOutcome {
        z_scores,
        flags,
        union_bound,
    }
}
