//! The Cauchy wavelet family.
//!
//! Fourier convention: `ŝ(ξ) = ∫ s(t) e^{-iξt} dt`. The unnormalized
//! frequency profile is `ξ^{(α-1)/2} e^{-ξ}` on `ξ ≥ 0` and zero elsewhere.
//! Everything is evaluated in the log domain, since the profile overflows
//! `f64` long before `α = 300`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};

/// Order of the Cauchy wavelet together with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveletParams {
    alpha: f64,
    /// `ln ‖ψ_α‖_{L²}` of the unnormalized wavelet, time domain.
    log_l2_norm: f64,
    /// Admissibility constant of the L²-normalized wavelet.
    admissibility: f64,
    /// Location of the frequency-domain peak, `(α-1)/2`.
    peak_xi: f64,
}

impl WaveletParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(domain(format!("wavelet order must be finite and > 1, got {alpha}")));
        }
        // ‖ψ‖² = (1/2π) ∫ ξ^{α-1} e^{-2ξ} dξ = Γ(α) / (2π 2^α)
        let log_l2_norm = 0.5 * (ln_gamma(alpha) - alpha * std::f64::consts::LN_2 - (2.0 * PI).ln());
        // ∫ |ψ̂(ξ)|² / ξ dξ / ‖ψ‖² = Γ(α-1) 2^{1-α} · 2π 2^α / Γ(α)
        let admissibility = 4.0 * PI / (alpha - 1.0);
        Ok(Self {
            alpha,
            log_l2_norm,
            admissibility,
            peak_xi: 0.5 * (alpha - 1.0),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn log_l2_norm(&self) -> f64 {
        self.log_l2_norm
    }

    pub fn admissibility(&self) -> f64 {
        self.admissibility
    }

    pub fn peak_xi(&self) -> f64 {
        self.peak_xi
    }

    /// Frequency in Hz associated with scale `y` (seconds): the peak of
    /// `ψ̂_α(yξ)` expressed in cycles per second.
    pub fn peak_frequency(&self, scale: f64) -> f64 {
        self.peak_xi / (2.0 * PI * scale)
    }

    /// Inverse of [`Self::peak_frequency`].
    pub fn scale_for_frequency(&self, hz: f64) -> f64 {
        self.peak_xi / (2.0 * PI * hz)
    }

    /// Half-width `t` (in units of the scale) beyond which
    /// `|ψ(t)| / |ψ(0)| = (1+t²)^{-(α+1)/4}` stays below `rel`.
    pub fn effective_half_support(&self, rel: f64) -> f64 {
        let p = 4.0 / (self.alpha + 1.0);
        (-(p * rel.ln())).exp_m1().sqrt()
    }

    /// L²-normalized frequency profile `ψ̂_α(ξ) / ‖ψ_α‖`.
    pub fn freq(&self, xi: f64) -> Result<f64> {
        if xi.is_nan() || xi < 0.0 {
            return Err(domain(format!("frequency must be non-negative, got {xi}")));
        }
        Ok(self.freq_unchecked(xi))
    }

    /// As [`Self::freq`], returning 0 for negative frequencies.
    #[inline]
    pub(crate) fn freq_unchecked(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return 0.0;
        }
        (self.peak_xi * xi.ln() - xi - self.log_l2_norm).exp()
    }

    /// L²-normalized time-domain wavelet,
    /// `ψ_α(t) = Γ((α+1)/2) / (2π (1-it)^{(α+1)/2}) / ‖ψ_α‖`.
    pub fn time(&self, t: f64) -> Complex64 {
        let p = 0.5 * (self.alpha + 1.0);
        let log_mod = ln_gamma(p) - (2.0 * PI).ln() - 0.5 * p * t.mul_add(t, 1.0).ln() - self.log_l2_norm;
        // (1 - it)^{-p} has argument p·atan(t)
        Complex64::from_polar(log_mod.exp(), p * t.atan())
    }
}

/// Free-function form of [`WaveletParams::freq`].
pub fn wavelet_freq(params: &WaveletParams, xi: f64) -> Result<f64> {
    params.freq(xi)
}

/// Free-function form of [`WaveletParams::time`].
pub fn wavelet_time(params: &WaveletParams, t: f64) -> Complex64 {
    params.time(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = 0.5 * (f(a) + f(b));
        for i in 1..n {
            acc += f(a + h * i as f64);
        }
        acc * h
    }

    #[test]
    fn rejects_non_admissible_orders() {
        assert!(WaveletParams::new(1.0).is_err());
        assert!(WaveletParams::new(0.5).is_err());
        assert!(WaveletParams::new(f64::NAN).is_err());
        assert!(WaveletParams::new(1.0001).is_ok());
    }

    #[test]
    fn zero_frequency_and_negative_domain() {
        let p = WaveletParams::new(300.0).unwrap();
        assert_eq!(p.freq(0.0).unwrap(), 0.0);
        assert!(p.freq(-1.0).is_err());
    }

    #[test]
    fn peak_is_global_maximum() {
        let p = WaveletParams::new(300.0).unwrap();
        assert_eq!(p.peak_xi(), 149.5);
        let peak = p.freq(149.5).unwrap();
        for i in 0..20000 {
            let xi = i as f64 * 0.05;
            assert!(p.freq(xi).unwrap() <= peak);
        }
    }

    #[test]
    fn normalization_matches_trapezoid_oracle() {
        // ψ̂_3(ξ) = ξ e^{-ξ}; ‖ψ‖² = (1/2π) ∫ ξ² e^{-2ξ} dξ
        let p = WaveletParams::new(3.0).unwrap();
        let norm2 = trapezoid(|x| x * x * (-2.0 * x).exp(), 0.0, 60.0, 600_000) / (2.0 * PI);
        let expected = (-1.0f64).exp() / norm2.sqrt();
        let got = p.freq(1.0).unwrap();
        assert!(((got - expected) / expected).abs() < 1e-8, "{got} vs {expected}");
    }

    #[test]
    fn admissibility_matches_quadrature() {
        for alpha in [2.5, 3.0, 7.0] {
            let p = WaveletParams::new(alpha).unwrap();
            let c = trapezoid(|x| p.freq_unchecked(x).powi(2) / x.max(1e-300), 1e-9, 200.0, 2_000_000);
            assert!(((c - p.admissibility()) / p.admissibility()).abs() < 1e-5, "alpha {alpha}: {c}");
        }
    }

    #[test]
    fn log_domain_is_finite_over_wide_range() {
        for alpha in [1.5, 3.0, 30.0, 300.0, 1000.0] {
            let p = WaveletParams::new(alpha).unwrap();
            for xi in [0.0, 1e-12, 1e-3, 1.0, 499.5, 1e3, 1e5, 1e6] {
                let v = p.freq(xi).unwrap();
                assert!(v.is_finite() && v >= 0.0, "alpha {alpha}, xi {xi}: {v}");
            }
        }
    }

    #[test]
    fn time_domain_peak_at_origin() {
        let p = WaveletParams::new(3.0).unwrap();
        let v0 = p.time(0.0);
        assert!(v0.im.abs() < 1e-15 && v0.re > 0.0);
        for i in 1..1000 {
            let t = i as f64 * 0.01;
            assert!(p.time(t).norm() < v0.norm());
            assert!(p.time(-t).norm() < v0.norm());
        }
    }

    #[test]
    fn high_order_decays_fast() {
        let p = WaveletParams::new(300.0).unwrap();
        let ratio = p.time(10.0).norm() / p.time(0.0).norm();
        let closed = (101.0f64).powf(-301.0 / 4.0);
        assert!(ratio < 1e-3);
        assert!(((ratio - closed) / closed).abs() < 1e-9);
    }

    #[test]
    fn time_domain_has_unit_norm() {
        let p = WaveletParams::new(3.0).unwrap();
        let e = trapezoid(|t| p.time(t).norm_sqr(), -4000.0, 4000.0, 4_000_000);
        assert!((e - 1.0).abs() < 1e-4, "{e}");
    }

    #[test]
    fn time_domain_matches_inverse_fft_of_profile() {
        use rustfft::FftPlanner;
        // sample ψ̂ on ξ_k = 2πk/(N dt); ψ(m dt) = (1/(N dt)) Σ_k ψ̂(ξ_k) e^{iξ_k m dt}
        let p = WaveletParams::new(3.0).unwrap();
        let n = 1 << 16;
        let dt = 0.05;
        let mut spec: Vec<Complex64> = (0..n)
            .map(|k| {
                let xi = 2.0 * PI * k as f64 / (n as f64 * dt);
                if k < n / 2 {
                    Complex64::new(p.freq_unchecked(xi), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
        let scale = 1.0 / (n as f64 * dt);
        let mut worst = 0.0f64;
        for m in 0..400 {
            let t = m as f64 * dt;
            let fft_val = spec[m] * scale;
            worst = worst.max((fft_val - p.time(t)).norm());
            let neg = spec[n - 1 - m] * scale;
            worst = worst.max((neg - p.time(-(m as f64 + 1.0) * dt)).norm());
        }
        assert!(worst < 1e-6, "max deviation {worst}");
    }

    #[test]
    fn effective_support_bounds_modulus() {
        for alpha in [3.0, 30.0, 300.0] {
            let p = WaveletParams::new(alpha).unwrap();
            let t = p.effective_half_support(1e-4);
            let r = p.time(t).norm() / p.time(0.0).norm();
            assert!((r - 1e-4).abs() < 1e-10, "alpha {alpha}: {r}");
        }
    }
}
