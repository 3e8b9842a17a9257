//! Spatial index for pseudo-hyperbolic disk queries over a zero pattern.
//!
//! Points are bucketed into horizontal bands of constant width in `ln y` and
//! sorted by `x` inside each band. A disk query visits the bands overlapping
//! the disk's Euclidean bounding box and binary-searches the `x` range in each.

use crate::geometry::{PHDisk, UHPPoint};

const DEFAULT_BAND_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, Default)]
struct Band {
    xs: Vec<f64>,
    ids: Vec<u32>,
}

/// Read-only index over a point pattern; ids are positions in the input slice.
#[derive(Debug, Clone)]
pub struct ZeroIndex {
    points: Vec<UHPPoint>,
    ln_y0: f64,
    band_width: f64,
    bands: Vec<Band>,
}

impl ZeroIndex {
    pub fn new(points: &[UHPPoint]) -> Self {
        Self::with_band_width(points, DEFAULT_BAND_WIDTH)
    }

    pub fn with_band_width(points: &[UHPPoint], band_width: f64) -> Self {
        assert!(band_width > 0.0, "band width must be positive");
        if points.is_empty() {
            return Self {
                points: Vec::new(),
                ln_y0: 0.0,
                band_width,
                bands: Vec::new(),
            };
        }
        let ln_y0 = points.iter().map(|p| p.y.ln()).fold(f64::INFINITY, f64::min);
        let ln_y1 = points.iter().map(|p| p.y.ln()).fold(f64::NEG_INFINITY, f64::max);
        let n_bands = ((ln_y1 - ln_y0) / band_width).floor() as usize + 1;
        let mut members: Vec<Vec<(f64, u32)>> = vec![Vec::new(); n_bands];
        for (i, p) in points.iter().enumerate() {
            let b = (((p.y.ln() - ln_y0) / band_width).floor() as usize).min(n_bands - 1);
            members[b].push((p.x, i as u32));
        }
        let bands = members
            .into_iter()
            .map(|mut m| {
                m.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                Band {
                    xs: m.iter().map(|e| e.0).collect(),
                    ids: m.iter().map(|e| e.1).collect(),
                }
            })
            .collect();
        Self {
            points: points.to_vec(),
            ln_y0,
            band_width,
            bands,
        }
    }

    pub fn points(&self) -> &[UHPPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Calls `f(id, d_ph²)` for every point strictly inside `disk`.
    pub fn for_each_in_disk(&self, disk: &PHDisk, mut f: impl FnMut(usize, f64)) {
        if self.bands.is_empty() {
            return;
        }
        let bb = disk.bounding_box();
        let r2 = disk.radius * disk.radius;
        let lo = ((bb.y_min.ln() - self.ln_y0) / self.band_width).floor();
        let hi = ((bb.y_max.ln() - self.ln_y0) / self.band_width).floor();
        if hi < 0.0 || lo >= self.bands.len() as f64 {
            return;
        }
        let lo = lo.max(0.0) as usize;
        let hi = (hi as usize).min(self.bands.len() - 1);
        for band in &self.bands[lo..=hi] {
            let start = band.xs.partition_point(|&x| x < bb.t_min);
            for (x, &id) in band.xs[start..].iter().zip(&band.ids[start..]) {
                if *x > bb.t_max {
                    break;
                }
                let d2 = disk.center.ph_dist_sq(&self.points[id as usize]);
                if d2 < r2 {
                    f(id as usize, d2);
                }
            }
        }
    }

    /// `|Z ∩ D|`.
    pub fn count_in_disk(&self, disk: &PHDisk) -> usize {
        let mut n = 0;
        self.for_each_in_disk(disk, |_, _| n += 1);
        n
    }

    /// Squared distances of all points inside `disk` from its center.
    pub fn dist_sq_in_disk(&self, disk: &PHDisk, out: &mut Vec<(usize, f64)>) {
        out.clear();
        self.for_each_in_disk(disk, |id, d2| out.push((id, d2)));
    }

    /// Number of points `z ≠ points[id]` with `lo < d_ph(points[id], z) < hi`.
    pub fn ring_count(&self, id: usize, lo: f64, hi: f64) -> usize {
        let center = self.points[id];
        let Ok(disk) = PHDisk::new(center, hi) else {
            return 0;
        };
        let lo2 = lo * lo;
        let mut n = 0;
        self.for_each_in_disk(&disk, |other, d2| {
            if other != id && d2 > lo2 {
                n += 1;
            }
        });
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ph_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<UHPPoint> {
        (0..n)
            .map(|_| UHPPoint {
                x: rng.random_range(0.0..2.0),
                y: (rng.random_range((0.002f64).ln()..(0.2f64).ln())).exp(),
            })
            .collect()
    }

    #[test]
    fn disk_counts_match_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..50 {
            let pts = random_points(&mut rng, 20 + trial * 10);
            let idx = ZeroIndex::with_band_width(&pts, [0.03, 0.1, 0.5][trial % 3]);
            for _ in 0..40 {
                let c = UHPPoint {
                    x: rng.random_range(0.0..2.0),
                    y: (rng.random_range((0.002f64).ln()..(0.2f64).ln())).exp(),
                };
                let r = rng.random_range(0.01..0.6);
                let disk = PHDisk::new(c, r).unwrap();
                let brute = pts.iter().filter(|p| ph_distance(&c, p) < r).count();
                assert_eq!(idx.count_in_disk(&disk), brute);
            }
        }
    }

    #[test]
    fn ring_counts_match_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let pts = random_points(&mut rng, 300);
        let idx = ZeroIndex::new(&pts);
        for id in 0..pts.len() {
            let brute = pts
                .iter()
                .enumerate()
                .filter(|(j, p)| *j != id && (ph_distance(&pts[id], p) - 0.3).abs() < 0.1)
                .count();
            assert_eq!(idx.ring_count(id, 0.2, 0.4), brute);
        }
    }

    #[test]
    fn empty_index() {
        let idx = ZeroIndex::new(&[]);
        let disk = PHDisk::new(UHPPoint { x: 0.0, y: 1.0 }, 0.5).unwrap();
        assert_eq!(idx.count_in_disk(&disk), 0);
    }
}
