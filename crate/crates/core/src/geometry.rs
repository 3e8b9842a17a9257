//! Pseudo-hyperbolic geometry of the upper half-plane.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::TimeScaleGrid;

/// Point `x + iy` of the upper half-plane; `x` is time, `y` is scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UHPPoint {
    pub x: f64,
    pub y: f64,
}

impl UHPPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && y > 0.0) {
            return Err(domain(format!("({x}, {y}) is not in the upper half-plane")));
        }
        Ok(Self { x, y })
    }

    /// Squared pseudo-hyperbolic distance `|z-w|² / |z-w̄|²`.
    #[inline]
    pub fn ph_dist_sq(&self, other: &UHPPoint) -> f64 {
        let dx = self.x - other.x;
        let dx2 = dx * dx;
        let dm = self.y - other.y;
        let dp = self.y + other.y;
        (dx2 + dm * dm) / (dx2 + dp * dp)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            x: self.x * c,
            y: self.y * c,
        }
    }
}

/// `d_ph(z, w) = |z - w| / |z - w̄|`, in `[0, 1)`.
pub fn ph_distance(z: &UHPPoint, w: &UHPPoint) -> f64 {
    z.ph_dist_sq(w).sqrt()
}

/// Checked variant on raw coordinates.
pub fn ph_distance_xy(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<f64> {
    Ok(ph_distance(&UHPPoint::new(x1, y1)?, &UHPPoint::new(x2, y2)?))
}

/// Pseudo-hyperbolic distance expressed as the hyperbolic (Poincaré) distance
/// `2·atanh(d)`, which is additive along geodesics.
pub fn hyperbolic_length(ph: f64) -> f64 {
    2.0 * ph.atanh()
}

/// Upper bound on `d_ph(z, u)` given `d_ph(z, w) < a` and `d_ph(w, u) < b`.
pub fn ph_triangle_bound(a: f64, b: f64) -> f64 {
    (a + b) / (1.0 + a * b)
}

/// Open pseudo-hyperbolic disk `{z : d_ph(center, z) < radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PHDisk {
    pub center: UHPPoint,
    pub radius: f64,
}

impl PHDisk {
    pub fn new(center: UHPPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(domain(format!("pseudo-hyperbolic radius must be in (0,1), got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, z: &UHPPoint) -> bool {
        self.center.ph_dist_sq(z) < self.radius * self.radius
    }

    /// The same set as a Euclidean disk: `(center, radius)`.
    pub fn euclidean(&self) -> (UHPPoint, f64) {
        let r2 = self.radius * self.radius;
        let v = self.center.y;
        let c = UHPPoint {
            x: self.center.x,
            y: v * (1.0 + r2) / (1.0 - r2),
        };
        (c, 2.0 * self.radius * v / (1.0 - r2))
    }

    /// Euclidean bounding box `[x0, x1] × [y0, y1]`.
    pub fn bounding_box(&self) -> Rect {
        let (c, r) = self.euclidean();
        let v = self.center.y;
        let k = (1.0 - self.radius) / (1.0 + self.radius);
        Rect {
            t_min: c.x - r,
            t_max: c.x + r,
            y_min: v * k,
            y_max: v / k,
        }
    }
}

pub fn ph_ball_contains(disk: &PHDisk, z: &UHPPoint) -> bool {
    disk.contains(z)
}

/// `r² / (1 - r²)`: hyperbolic area of a pseudo-hyperbolic disk in the unit
/// where the expected zero count is `α` times this value.
pub fn hyperbolic_area(disk: &PHDisk) -> f64 {
    area_factor(disk.radius)
}

pub(crate) fn area_factor(r: f64) -> f64 {
    let r2 = r * r;
    r2 / (1.0 - r2)
}

/// Axis-aligned rectangle `[t_min, t_max] × [y_min, y_max]` in the half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub t_min: f64,
    pub t_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(t_min: f64, t_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(t_min < t_max && y_min > 0.0 && y_min < y_max) {
            return Err(domain(format!(
                "invalid window [{t_min}, {t_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Self {
            t_min,
            t_max,
            y_min,
            y_max,
        })
    }

    /// Closed containment.
    pub fn contains(&self, z: &UHPPoint) -> bool {
        z.x >= self.t_min && z.x <= self.t_max && z.y >= self.y_min && z.y <= self.y_max
    }

    pub fn grid_coverage(grid: &TimeScaleGrid) -> Self {
        let t = grid.times();
        let y = grid.scales();
        Self {
            t_min: t[0],
            t_max: t[t.len() - 1],
            y_min: y[0],
            y_max: y[y.len() - 1],
        }
    }

    /// Pseudo-hyperbolic distance from `z` to the rectangle boundary,
    /// approximated by `samples` evenly spaced points per edge.
    pub fn boundary_distance_sampled(&self, z: &UHPPoint, samples: usize) -> f64 {
        let mut best = f64::INFINITY;
        let n = samples.max(2);
        for i in 0..n {
            let f = i as f64 / (n - 1) as f64;
            let t = self.t_min + f * (self.t_max - self.t_min);
            let y = self.y_min + f * (self.y_max - self.y_min);
            for p in [
                UHPPoint { x: t, y: self.y_min },
                UHPPoint { x: t, y: self.y_max },
                UHPPoint { x: self.t_min, y },
                UHPPoint { x: self.t_max, y },
            ] {
                best = best.min(z.ph_dist_sq(&p));
            }
        }
        best.sqrt()
    }
}

/// Window of trusted data plus a pseudo-hyperbolic standoff from its boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionOfInterest {
    pub window: Rect,
    pub margin: f64,
}

impl RegionOfInterest {
    pub fn new(window: Rect, margin: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&margin) {
            return Err(domain(format!("margin must be in [0,1), got {margin}")));
        }
        Ok(Self { window, margin })
    }

    /// True iff `z` is inside the window and every boundary point is at
    /// pseudo-hyperbolic distance greater than `margin`.
    ///
    /// Exact: the closed disk `{d_ph(z, ·) ≤ margin}` is a Euclidean disk and
    /// must lie in the open window.
    pub fn contains(&self, z: &UHPPoint) -> bool {
        let w = &self.window;
        let m = self.margin;
        if m == 0.0 {
            return z.x > w.t_min && z.x < w.t_max && z.y > w.y_min && z.y < w.y_max;
        }
        let m2 = m * m;
        let half_width = 2.0 * m * z.y / (1.0 - m2);
        let k = (1.0 - m) / (1.0 + m);
        z.x - half_width > w.t_min && z.x + half_width < w.t_max && z.y * k > w.y_min && z.y / k < w.y_max
    }

    pub fn filter_points(&self, points: &[UHPPoint]) -> Vec<UHPPoint> {
        points.iter().copied().filter(|p| self.contains(p)).collect()
    }

    /// Membership of every grid point, `[scale][time]` layout.
    pub fn grid_mask(&self, grid: &TimeScaleGrid) -> Vec<bool> {
        let mut out = Vec::with_capacity(grid.n_times() * grid.n_scales());
        for &y in grid.scales() {
            for &x in grid.times() {
                out.push(self.contains(&UHPPoint { x, y }));
            }
        }
        out
    }

    /// Time-index range of grid points inside the region for every scale row
    /// that has any; `(scale_index, time_range)`.
    pub fn grid_rows(&self, grid: &TimeScaleGrid) -> Vec<(usize, std::ops::Range<usize>)> {
        let times = grid.times();
        grid.scales()
            .iter()
            .enumerate()
            .filter_map(|(j, &y)| {
                let probe = |x: f64| self.contains(&UHPPoint { x, y });
                let mid = 0.5 * (self.window.t_min + self.window.t_max);
                if !probe(mid) {
                    return None;
                }
                // membership along a row is an interval around the middle
                let lo = times.partition_point(|&x| x < mid && !probe(x));
                let hi = times.partition_point(|&x| x < mid || probe(x));
                (lo < hi).then_some((j, lo..hi))
            })
            .collect()
    }
}
