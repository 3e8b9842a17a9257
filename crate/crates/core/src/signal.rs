//! Sampled signals and discrete white noise.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Whether a signal (or a noise realization) is real or complex valued.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    Real,
    Complex,
}

/// Uniformly sampled signal. Sample `ℓ` sits at `origin_time + ℓ·sample_interval`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBuffer {
    samples: Vec<Complex64>,
    sample_interval: f64,
    origin_time: f64,
    kind: NoiseKind,
}

impl SignalBuffer {
    pub fn new(samples: Vec<Complex64>, sample_interval: f64, origin_time: f64) -> Result<Self> {
        let kind = if samples.iter().all(|s| s.im == 0.0) {
            NoiseKind::Real
        } else {
            NoiseKind::Complex
        };
        Self::with_kind(samples, sample_interval, origin_time, kind)
    }

    pub fn from_real(samples: &[f64], sample_interval: f64, origin_time: f64) -> Result<Self> {
        let samples = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::with_kind(samples, sample_interval, origin_time, NoiseKind::Real)
    }

    fn with_kind(
        samples: Vec<Complex64>,
        sample_interval: f64,
        origin_time: f64,
        kind: NoiseKind,
    ) -> Result<Self> {
        if !(sample_interval.is_finite() && sample_interval > 0.0) {
            return Err(invalid(format!("sample interval must be > 0, got {sample_interval}")));
        }
        if samples.is_empty() {
            return Err(invalid("signal is empty"));
        }
        if kind == NoiseKind::Real && samples.iter().any(|s| s.im != 0.0) {
            return Err(invalid("real signal with non-zero imaginary parts"));
        }
        Ok(Self {
            samples,
            sample_interval,
            origin_time,
            kind,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn real_samples(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.re).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.sample_interval
    }

    pub fn origin_time(&self) -> f64 {
        self.origin_time
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn is_real(&self) -> bool {
        self.kind == NoiseKind::Real
    }

    /// Duration `L·T_s`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.sample_interval
    }

    pub fn time_of(&self, index: usize) -> f64 {
        self.origin_time + index as f64 * self.sample_interval
    }

    /// Returns `a·self + b·other`; both must share sampling and length.
    pub fn linear_combination(&self, a: Complex64, other: &SignalBuffer, b: Complex64) -> Result<Self> {
        if self.len() != other.len() || self.sample_interval != other.sample_interval {
            return Err(invalid("signals differ in length or sampling"));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| a * x + b * y)
            .collect();
        SignalBuffer::new(samples, self.sample_interval, self.origin_time)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * c).collect(),
            ..self.clone()
        }
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// I.i.d. centered Gaussian samples with variance `sample_interval` each.
///
/// For complex noise the variance is split evenly between the real and the
/// imaginary part. Deterministic in `seed`.
pub fn generate_white_noise(length: usize, sample_interval: f64, kind: NoiseKind, seed: u64) -> Result<SignalBuffer> {
    if length == 0 {
        return Err(invalid("noise length must be >= 1"));
    }
    if !(sample_interval.is_finite() && sample_interval > 0.0) {
        return Err(invalid(format!("sample interval must be > 0, got {sample_interval}")));
    }
    let mut rng = rng_for(seed);
    let samples = match kind {
        NoiseKind::Real => {
            let sd = sample_interval.sqrt();
            (0..length)
                .map(|_| {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(sd * x, 0.0)
                })
                .collect()
        }
        NoiseKind::Complex => {
            let sd = (0.5 * sample_interval).sqrt();
            (0..length)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(sd * re, sd * im)
                })
                .collect()
        }
    };
    SignalBuffer::with_kind(samples, sample_interval, 0.0, kind)
}

/// Coarsens a noise realization by summing adjacent pairs.
///
/// White noise applied to `((ℓ-1)T, ℓT)` is additive over adjacent intervals,
/// so the result is the same continuous noise discretized at spacing `2T`.
pub fn refine_noise(fine: &SignalBuffer) -> Result<SignalBuffer> {
    if fine.len() % 2 != 0 {
        return Err(invalid(format!("refinement needs an even length, got {}", fine.len())));
    }
    let samples = fine.samples.chunks_exact(2).map(|p| p[0] + p[1]).collect();
    SignalBuffer::with_kind(samples, 2.0 * fine.sample_interval, fine.origin_time, fine.kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_moments_match() {
        let n = generate_white_noise(1_000_000, 1.0, NoiseKind::Complex, 7).unwrap();
        let mean: Complex64 = n.samples().iter().sum::<Complex64>() / n.len() as f64;
        let var = n.samples().iter().map(|s| (s - mean).norm_sqr()).sum::<f64>() / (n.len() - 1) as f64;
        assert!(mean.norm() < 4e-3, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
        let re_var = n.samples().iter().map(|s| s.re * s.re).sum::<f64>() / n.len() as f64;
        assert!((re_var - 0.5).abs() < 0.01);
    }

    #[test]
    fn real_noise_variance_is_sample_interval() {
        let t = 1.0 / 44100.0;
        let n = generate_white_noise(200_000, t, NoiseKind::Real, 1).unwrap();
        assert!(n.is_real());
        let var = n.samples().iter().map(|s| s.re * s.re).sum::<f64>() / n.len() as f64;
        assert!((var / t - 1.0).abs() < 0.02);
    }

    #[test]
    fn single_sample_and_determinism() {
        let one = generate_white_noise(1, 0.5, NoiseKind::Real, 3).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one.samples()[0].re.is_finite());
        let a = generate_white_noise(1000, 0.5, NoiseKind::Complex, 42).unwrap();
        let b = generate_white_noise(1000, 0.5, NoiseKind::Complex, 42).unwrap();
        let c = generate_white_noise(1000, 0.5, NoiseKind::Complex, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(generate_white_noise(0, 1.0, NoiseKind::Real, 0).is_err());
    }

    #[test]
    fn refinement_sums_pairs() {
        let s = SignalBuffer::from_real(&[1.0, 2.0, 3.0, 4.0], 0.25, 0.0).unwrap();
        let c = refine_noise(&s).unwrap();
        assert_eq!(c.real_samples(), vec![3.0, 7.0]);
        assert_eq!(c.sample_interval(), 0.5);
        let odd = SignalBuffer::from_real(&[1.0, 2.0, 3.0], 0.25, 0.0).unwrap();
        assert!(refine_noise(&odd).is_err());
    }

    #[test]
    fn refined_variance_doubles() {
        let t = 0.01;
        let fine = generate_white_noise(400_000, t, NoiseKind::Complex, 5).unwrap();
        let coarse = refine_noise(&fine).unwrap();
        let var = coarse.samples().iter().map(|s| s.norm_sqr()).sum::<f64>() / coarse.len() as f64;
        assert!((var / (2.0 * t) - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(SignalBuffer::from_real(&[], 1.0, 0.0).is_err());
        assert!(SignalBuffer::from_real(&[1.0], 0.0, 0.0).is_err());
        assert!(SignalBuffer::from_real(&[1.0], -1.0, 0.0).is_err());
    }
}
