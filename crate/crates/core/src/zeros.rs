//! Zeros of a scalogram as strict local minima of its modulus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cwt::Scalogram;
use crate::error::{invalid, Result};
use crate::geometry::{Rect, UHPPoint};
use crate::grid::TimeScaleGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Neighborhood {
    /// Axis neighbors only.
    #[default]
    Four,
    /// Axis and diagonal neighbors; experimental.
    Eight,
}

/// Zero pattern extracted from a scalogram.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    points: Vec<UHPPoint>,
    /// `(scale_index, time_index)` of each point on the source grid.
    cells: Vec<(usize, usize)>,
    source_grid: TimeScaleGrid,
}

impl ZeroSet {
    /// Zero set from arbitrary points; `cells` are left empty.
    pub fn from_points(points: Vec<UHPPoint>, source_grid: TimeScaleGrid) -> Self {
        Self {
            points,
            cells: Vec::new(),
            source_grid,
        }
    }

    pub fn points(&self) -> &[UHPPoint] {
        &self.points
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    pub fn source_grid(&self) -> &TimeScaleGrid {
        &self.source_grid
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sub-grid positions from a separable quadratic fit of the log-modulus
    /// around every zero. Scale offsets are applied in `ln y`.
    pub fn refined(&self, scalogram: &Scalogram) -> ZeroSet {
        let grid = scalogram.grid();
        let times = grid.times();
        let ln_ratio = grid.scale_ratio().ln();
        let lm = |j: usize, k: usize| scalogram.get(j, k).norm().max(f64::MIN_POSITIVE).ln();
        let vertex = |a: f64, b: f64, c: f64| {
            let den = a - 2.0 * b + c;
            if den > 0.0 {
                (0.5 * (a - c) / den).clamp(-0.5, 0.5)
            } else {
                0.0
            }
        };
        let points = self
            .cells
            .iter()
            .map(|&(j, k)| {
                let dk = vertex(lm(j, k - 1), lm(j, k), lm(j, k + 1));
                let dj = vertex(lm(j - 1, k), lm(j, k), lm(j + 1, k));
                let dt = if dk >= 0.0 { times[k + 1] - times[k] } else { times[k] - times[k - 1] };
                UHPPoint {
                    x: times[k] + dk * dt,
                    y: grid.scales()[j] * (dj * ln_ratio).exp(),
                }
            })
            .collect();
        ZeroSet {
            points,
            cells: self.cells.clone(),
            source_grid: self.source_grid.clone(),
        }
    }

    /// Copy with every point mapped by `z ↦ c·z`.
    pub fn scaled(&self, c: f64) -> Result<ZeroSet> {
        let grid = TimeScaleGrid::new(
            self.source_grid.times().iter().map(|t| t * c).collect(),
            self.source_grid.scales().iter().map(|y| y * c).collect(),
        )?;
        Ok(ZeroSet {
            points: self.points.iter().map(|p| p.scaled(c)).collect(),
            cells: self.cells.clone(),
            source_grid: grid,
        })
    }
}

/// Interior grid points where the modulus is strictly below all neighbors.
///
/// Boundary rows and columns are never reported. Comparisons use the squared
/// modulus, which orders identically.
pub fn extract_zeros(scalogram: &Scalogram, neighborhood: Neighborhood) -> Result<ZeroSet> {
    let ns = scalogram.n_scales();
    let nt = scalogram.n_times();
    if ns < 3 || nt < 3 {
        return Err(invalid(format!("zero extraction needs a 3x3 grid, got {ns}x{nt}")));
    }
    let m: Vec<f64> = scalogram.values().iter().map(|v| v.norm_sqr()).collect();
    let cells: Vec<(usize, usize)> = (1..ns - 1)
        .into_par_iter()
        .flat_map_iter(|j| {
            let m = &m;
            (1..nt - 1).filter_map(move |k| {
                let at = |jj: usize, kk: usize| m[jj * nt + kk];
                let c = at(j, k);
                let mut is_min = c < at(j, k - 1) && c < at(j, k + 1) && c < at(j - 1, k) && c < at(j + 1, k);
                if is_min && neighborhood == Neighborhood::Eight {
                    is_min = c < at(j - 1, k - 1) && c < at(j - 1, k + 1) && c < at(j + 1, k - 1) && c < at(j + 1, k + 1);
                }
                is_min.then_some((j, k))
            })
        })
        .collect();
    let grid = scalogram.grid();
    let points = cells
        .iter()
        .map(|&(j, k)| UHPPoint {
            x: grid.times()[k],
            y: grid.scales()[j],
        })
        .collect();
    Ok(ZeroSet {
        points,
        cells,
        source_grid: grid.clone(),
    })
}

/// Number of zeros in the closed rectangle `window`.
pub fn zero_density_map(zeros: &ZeroSet, window: &Rect) -> usize {
    zeros.points().iter().filter(|p| window.contains(p)).count()
}

/// True iff the cell is a strict minimum of `|values|` among its 4 neighbors.
pub fn is_strict_local_min(scalogram: &Scalogram, scale_index: usize, time_index: usize) -> bool {
    let (j, k) = (scale_index, time_index);
    if j == 0 || k == 0 || j + 1 >= scalogram.n_scales() || k + 1 >= scalogram.n_times() {
        return false;
    }
    let c = scalogram.get(j, k).norm();
    [(j, k - 1), (j, k + 1), (j - 1, k), (j + 1, k)]
        .iter()
        .all(|&(a, b)| c < scalogram.get(a, b).norm())
}
