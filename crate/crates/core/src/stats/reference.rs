//! Closed-form statistics of the zero set of the hyperbolic GAF of order `α`.
//!
//! With `s = 1 - r²`, powers `s^α` are evaluated as `exp(α·log1p(-r²))` and
//! differences `1 - s^α` through `expm1`, which keeps `α` in the hundreds
//! usable near `r → 0`.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::geometry::UHPPoint;
use crate::quadrature::integrate;

/// Below this value of `α·r²` the small-`r` series replace the closed forms.
const SERIES_THRESHOLD: f64 = 1e-4;

/// Rings reaching beyond this pseudo-hyperbolic radius are rejected; the
/// expected count diverges as the outer radius approaches 1.
pub const MAX_RING_RADIUS: f64 = 1.0 - 1e-6;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 1.0 {
        Ok(())
    } else {
        Err(domain(format!("alpha must be > 1, got {alpha}")))
    }
}

fn check_radius(r: f64, what: &str) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("{what} must be in (0,1), got {r}")))
    }
}

/// `ρ(z) = α / (4π y²)`.
pub fn first_intensity(alpha: f64, z: &UHPPoint) -> Result<f64> {
    check_alpha(alpha)?;
    if !(z.y > 0.0) {
        return Err(domain(format!("scale must be > 0, got {}", z.y)));
    }
    Ok(alpha / (4.0 * PI * z.y * z.y))
}

/// `μ_r = α r² / (1 - r²)`, expected number of zeros in a disk of
/// pseudo-hyperbolic radius `r`.
pub fn expected_count(alpha: f64, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_radius(r, "radius")?;
    Ok(alpha * crate::geometry::area_factor(r))
}

/// Integrand of the count variance on `t ∈ (-π, π)`, already divided through
/// by `(1-r²)^{2α}`:
/// `2(1 - cos t) / (|1 - r² e^{it}|² · expm1(α·ln(|1 - r² e^{it}|² / (1-r²)²)))`.
/// The removable singularity at `t = 0` takes its limit `1/(α r²)`.
pub fn count_variance_integrand(alpha: f64, r: f64, t: f64) -> f64 {
    let e = r * r;
    if t == 0.0 {
        return 1.0 / (alpha * e);
    }
    let s = 1.0 - e;
    let half = (0.5 * t).sin();
    let one_minus_cos = 2.0 * half * half;
    let gap = 2.0 * e * one_minus_cos;
    let m = s * s + gap;
    let denom = (alpha * (gap / (s * s)).ln_1p()).exp_m1();
    2.0 * one_minus_cos / (m * denom)
}

/// `σ²_r`, variance of the number of zeros in a disk of radius `r`, by
/// adaptive quadrature with relative tolerance `quadrature_tol`.
pub fn count_variance(alpha: f64, r: f64, quadrature_tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_radius(r, "radius")?;
    let e = r * r;
    let s = 1.0 - e;
    let integral = integrate(
        |t| count_variance_integrand(alpha, r, t),
        0.0,
        PI,
        0.0,
        quadrature_tol,
        4096,
    )?;
    // the integrand is even: ∫_{-π}^{π} = 2 ∫_0^π
    Ok(alpha * alpha * e * e / (2.0 * PI * s * s) * 2.0 * integral.value)
}

struct Powers {
    /// `r²`
    e: f64,
    /// `1 - r²`
    s: f64,
    /// `s^α`
    s_a: f64,
    /// `1 - s^α`
    one_minus_s_a: f64,
}

fn powers(alpha: f64, r: f64) -> Powers {
    let e = r * r;
    let ln_s = (-e).ln_1p();
    Powers {
        e,
        s: 1.0 - e,
        s_a: (alpha * ln_s).exp(),
        one_minus_s_a: -(alpha * ln_s).exp_m1(),
    }
}

/// Pair correlation `g(r)` of the zero process in the cancellation-free form
/// `[s^α(α(1-s) - s(1-s^α))² + (α s^α (1-s) - (1-s^α))²] / (1-s^α)³`.
pub fn pair_correlation(alpha: f64, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_radius(r, "radius")?;
    Ok(pair_correlation_unchecked(alpha, r))
}

pub(crate) fn pair_correlation_unchecked(alpha: f64, r: f64) -> f64 {
    let p = powers(alpha, r);
    if alpha * p.e < SERIES_THRESHOLD {
        return pair_correlation_series(alpha, p.e);
    }
    let a = alpha * p.e - p.s * p.one_minus_s_a;
    let b = alpha * p.s_a * p.e - p.one_minus_s_a;
    (p.s_a * a * a + b * b) / p.one_minus_s_a.powi(3)
}

/// Taylor expansion of `g` in `ε = r²` through `ε⁵`.
fn pair_correlation_series(alpha: f64, e: f64) -> f64 {
    let ap = (alpha + 1.0) * (alpha + 1.0);
    let am = (alpha - 1.0) * (alpha - 1.0);
    let c1 = ap / (2.0 * alpha);
    let c2 = -ap / (4.0 * alpha);
    let c3 = -am * ap / (36.0 * alpha);
    let c4 = -am * ap / (72.0 * alpha);
    let c5 = am * ap * (2.0 * alpha * alpha - 13.0) / (1440.0 * alpha);
    e * (c1 + e * (c2 + e * (c3 + e * (c4 + e * c5))))
}

/// Pair correlation in its expanded polynomial form. Numerically unstable as
/// `r → 0`; kept as an independent route for cross-checks.
pub fn pair_correlation_raw(alpha: f64, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_radius(r, "radius")?;
    let s = 1.0 - r * r;
    let sp = |k: f64| s.powf(k);
    let a = alpha;
    let num = 1.0 + (a * a - 2.0 * a - 2.0) * (sp(a) + sp(2.0 + 2.0 * a)) + (a + 1.0).powi(2) * (sp(2.0 * a) + sp(2.0 + a))
        - 2.0 * a * a * (sp(1.0 + a) + sp(1.0 + 2.0 * a))
        + sp(2.0 + 3.0 * a);
    Ok(num / (1.0 - sp(a)).powi(3))
}

/// Antiderivative bracket in `s = 1 - r²`:
/// `[(α+1) s^α (1-s)² - (1 - s^{α+1})²] / (s (1 - s^α)²)`, with the value
/// `-(α+1)/α` at `s = 1`. Takes `r` rather than `s` to keep precision.
pub fn ring_bracket(alpha: f64, r: f64) -> f64 {
    let e = r * r;
    if alpha * e < SERIES_THRESHOLD {
        let ap = (alpha + 1.0) * (alpha + 1.0);
        let c0 = -(alpha + 1.0) / alpha;
        let c2 = -ap / (4.0 * alpha);
        let c4 = (alpha - 7.0) * ap * (alpha + 5.0) / (144.0 * alpha);
        let c5 = ap * (alpha * alpha - 2.0 * alpha - 17.0) / (72.0 * alpha);
        return c0 + e * e * (c2 + e * (c2 + e * (c4 + e * c5)));
    }
    let p = powers(alpha, r);
    let ln_s = (-e).ln_1p();
    let one_minus_s_a1 = -((alpha + 1.0) * ln_s).exp_m1();
    ((alpha + 1.0) * p.s_a * e * e - one_minus_s_a1 * one_minus_s_a1) / (p.s * p.one_minus_s_a * p.one_minus_s_a)
}

/// Expected number of ordered pairs `(w, z)` of distinct zeros with
/// `w ∈ D(w₁, r₁)` and `a < d_ph(z, w) < b`:
/// `α² r₁²/(1-r₁²) · (B(1-a²) - B(1-b²))`.
pub fn ring_count_expectation(alpha: f64, a: f64, b: f64, r1: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_radius(r1, "disk radius")?;
    if !(a >= 0.0 && a < b && b < 1.0) {
        return Err(domain(format!("ring bounds must satisfy 0 <= a < b < 1, got ({a}, {b})")));
    }
    if b > MAX_RING_RADIUS {
        return Err(domain(format!("outer ring radius {b} too close to 1; the expectation diverges")));
    }
    let r1s = r1 * r1;
    Ok(alpha * alpha * r1s / (1.0 - r1s) * (ring_bracket(alpha, a) - ring_bracket(alpha, b)))
}

/// `g̃(r₀, h)`: exact expectation target for the ring estimator of width `h`,
/// `(1-r₀²)²/(4 h r₀) · (B(1-(r₀-h)²) - B(1-(r₀+h)²))`.
pub fn corrected_pcf(alpha: f64, r0: f64, h: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(h > 0.0 && h <= r0 && r0 + h < 1.0) {
        return Err(domain(format!("need 0 < h <= r0 and r0 + h < 1, got r0 = {r0}, h = {h}")));
    }
    let lo = (r0 - h).max(0.0);
    let s0 = 1.0 - r0 * r0;
    Ok(s0 * s0 / (4.0 * h * r0) * (ring_bracket(alpha, lo) - ring_bracket(alpha, r0 + h)))
}

/// Log-spaced table of `σ²_r` with monotone cubic (Fritsch–Carlson)
/// interpolation. Radii registered through [`ReferenceStats::pin`] are
/// returned exactly.
#[derive(Debug, Clone)]
pub struct ReferenceStats {
    alpha: f64,
    ln_r: Vec<f64>,
    sigma2: Vec<f64>,
    slopes: Vec<f64>,
    pinned: Vec<(f64, f64)>,
}

/// Number of nodes of the variance table.
pub const SIGMA2_TABLE_NODES: usize = 256;
const TABLE_R_MIN: f64 = 1e-3;
const TABLE_R_MAX: f64 = 0.95;
const TABLE_TOL: f64 = 1e-10;

impl ReferenceStats {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let n = SIGMA2_TABLE_NODES;
        let (l0, l1) = (TABLE_R_MIN.ln(), TABLE_R_MAX.ln());
        let ln_r: Vec<f64> = (0..n).map(|i| l0 + (l1 - l0) * i as f64 / (n - 1) as f64).collect();
        let sigma2 = ln_r
            .iter()
            .map(|&l| count_variance(alpha, l.exp(), TABLE_TOL))
            .collect::<Result<Vec<_>>>()?;
        let slopes = fritsch_carlson(&ln_r, &sigma2);
        Ok(Self {
            alpha,
            ln_r,
            sigma2,
            slopes,
            pinned: Vec::new(),
        })
    }

    /// Adds exact variances for `radii`.
    pub fn pin(mut self, radii: &[f64]) -> Result<Self> {
        for &r in radii {
            if self.pinned.iter().all(|(p, _)| *p != r) {
                self.pinned.push((r, count_variance(self.alpha, r, TABLE_TOL)?));
            }
        }
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self, r: f64) -> Result<f64> {
        expected_count(self.alpha, r)
    }

    pub fn sigma2(&self, r: f64) -> Result<f64> {
        check_radius(r, "radius")?;
        if let Some((_, v)) = self.pinned.iter().find(|(p, _)| *p == r) {
            return Ok(*v);
        }
        let l = r.ln();
        if l < self.ln_r[0] || l > self.ln_r[self.ln_r.len() - 1] {
            return count_variance(self.alpha, r, TABLE_TOL);
        }
        let i = (self.ln_r.partition_point(|&x| x <= l)).clamp(1, self.ln_r.len() - 1) - 1;
        let h = self.ln_r[i + 1] - self.ln_r[i];
        let t = (l - self.ln_r[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.sigma2[i] + h10 * h * self.slopes[i] + h01 * self.sigma2[i + 1] + h11 * h * self.slopes[i + 1])
    }

    pub fn g(&self, r: f64) -> Result<f64> {
        pair_correlation(self.alpha, r)
    }

    pub fn g_tilde(&self, r0: f64, h: f64) -> Result<f64> {
        corrected_pcf(self.alpha, r0, h)
    }
}

fn fritsch_carlson(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        m[i] = if delta[i - 1] * delta[i] <= 0.0 {
            0.0
        } else {
            0.5 * (delta[i - 1] + delta[i])
        };
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / delta[i];
        let b = m[i + 1] / delta[i];
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[i] = tau * a * delta[i];
            m[i + 1] = tau * b * delta[i];
        }
    }
    m
}


#[cfg(test)]
pub(crate) mod tests_support {
    use crate::tables::DefaultRadii;

    pub fn r1() -> [f64; 5] {
        DefaultRadii::standard().r1.try_into().unwrap()
    }

    pub fn r0() -> [f64; 3] {
        DefaultRadii::standard().r0.try_into().unwrap()
    }

    pub fn h() -> f64 {
        DefaultRadii::standard().h
    }
}
