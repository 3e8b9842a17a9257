//! Time-scale sampling grids.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::signal::SignalBuffer;
use crate::wavelet::WaveletParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleSpacing {
    Geometric,
}

/// Product grid of time positions (`x`, seconds) and scales (`y`, seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScaleGrid {
    times: Vec<f64>,
    scales: Vec<f64>,
    spacing: ScaleSpacing,
}

const RATIO_TOL: f64 = 1e-9;

impl TimeScaleGrid {
    pub fn new(times: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        if times.is_empty() || scales.is_empty() {
            return Err(invalid("grid needs at least one time and one scale"));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid times must be finite and strictly increasing"));
        }
        if scales.iter().any(|y| !(y.is_finite() && *y > 0.0)) {
            return Err(invalid("grid scales must be finite and positive"));
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid scales must be strictly increasing"));
        }
        if scales.len() >= 3 {
            let r0 = scales[1] / scales[0];
            if scales.windows(2).any(|w| ((w[1] / w[0]) / r0 - 1.0).abs() > RATIO_TOL) {
                return Err(invalid("grid scales must be geometrically spaced"));
            }
        }
        Ok(Self {
            times,
            scales,
            spacing: ScaleSpacing::Geometric,
        })
    }

    /// Grid whose times are every `stride`-th sample of `signal`.
    pub fn for_signal(signal: &SignalBuffer, stride: usize, scales: Vec<f64>) -> Result<Self> {
        if stride == 0 {
            return Err(invalid("time stride must be >= 1"));
        }
        let times = (0..signal.len()).step_by(stride).map(|i| signal.time_of(i)).collect();
        Self::new(times, scales)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn spacing(&self) -> ScaleSpacing {
        self.spacing
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn n_scales(&self) -> usize {
        self.scales.len()
    }

    /// Constant ratio between consecutive scales (1 for a single scale).
    pub fn scale_ratio(&self) -> f64 {
        if self.scales.len() < 2 {
            1.0
        } else {
            self.scales[1] / self.scales[0]
        }
    }

    /// Spacing of the time axis, if uniform.
    pub fn time_step(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let dt = self.times[1] - self.times[0];
        let uniform = self
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1e-300) * (self.times.len() as f64));
        uniform.then_some(dt)
    }

    /// Index of the grid time nearest to `t`.
    pub fn nearest_time_index(&self, t: f64) -> usize {
        nearest(&self.times, t)
    }

    pub fn nearest_scale_index(&self, y: f64) -> usize {
        nearest(&self.scales, y)
    }

    pub fn same_as(&self, other: &TimeScaleGrid) -> bool {
        self == other
    }
}

fn nearest(v: &[f64], x: f64) -> usize {
    match v.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => i,
        Err(0) => 0,
        Err(i) if i >= v.len() => v.len() - 1,
        Err(i) => {
            if (x - v[i - 1]).abs() <= (v[i] - x).abs() {
                i - 1
            } else {
                i
            }
        }
    }
}

/// `n` geometrically spaced scales starting at `min_scale`, `voices` per octave.
pub fn geometric_scales(min_scale: f64, voices_per_octave: usize, n: usize) -> Result<Vec<f64>> {
    if !(min_scale.is_finite() && min_scale > 0.0) {
        return Err(invalid(format!("minimum scale must be > 0, got {min_scale}")));
    }
    if voices_per_octave == 0 || n == 0 {
        return Err(invalid("need at least one voice per octave and one scale"));
    }
    let step = std::f64::consts::LN_2 / voices_per_octave as f64;
    Ok((0..n).map(|j| min_scale * (step * j as f64).exp()).collect())
}

/// Serializable recipe for a grid family: sample rate, time decimation and
/// the geometric scale ladder. Signals of any length at `sample_rate` map to
/// a concrete [`TimeScaleGrid`] through [`GridSpec::build`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub sample_rate: f64,
    pub time_stride: usize,
    pub min_scale: f64,
    pub voices_per_octave: usize,
    pub n_scales: usize,
}

impl GridSpec {
    /// Scales whose peak frequencies cover `[f_lo, f_hi]` Hz.
    pub fn from_frequency_range(
        params: &WaveletParams,
        sample_rate: f64,
        f_lo: f64,
        f_hi: f64,
        voices_per_octave: usize,
    ) -> Result<Self> {
        if !(f_lo > 0.0 && f_hi > f_lo) {
            return Err(invalid(format!("bad frequency range [{f_lo}, {f_hi}]")));
        }
        if f_hi >= 0.5 * sample_rate {
            return Err(invalid(format!("upper frequency {f_hi} Hz is not below Nyquist")));
        }
        if voices_per_octave == 0 {
            return Err(invalid("need at least one voice per octave"));
        }
        let min_scale = params.scale_for_frequency(f_hi);
        let octaves = (f_hi / f_lo).log2();
        let n_scales = (octaves * voices_per_octave as f64).round() as usize + 1;
        Ok(Self {
            sample_rate,
            time_stride: 1,
            min_scale,
            voices_per_octave,
            n_scales,
        })
    }

    pub fn scales(&self) -> Result<Vec<f64>> {
        geometric_scales(self.min_scale, self.voices_per_octave, self.n_scales)
    }

    pub fn max_scale(&self) -> f64 {
        self.min_scale * 2f64.powf((self.n_scales.saturating_sub(1)) as f64 / self.voices_per_octave as f64)
    }

    pub fn build(&self, signal: &SignalBuffer) -> Result<TimeScaleGrid> {
        if (signal.sample_rate() - self.sample_rate).abs() > 1e-6 * self.sample_rate {
            return Err(crate::Error::GridMismatch(format!(
                "signal sampled at {} Hz, grid expects {} Hz",
                signal.sample_rate(),
                self.sample_rate
            )));
        }
        TimeScaleGrid::for_signal(signal, self.time_stride, self.scales()?)
    }
}
