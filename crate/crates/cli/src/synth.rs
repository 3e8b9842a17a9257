//! Deterministic test signals standing in for recorded speech and percussion.

use std::f64::consts::TAU;

/// Voiced, speech-like signal: a harmonic series on a gliding pitch
/// (110–170 Hz), shaped by three fixed formants and gated by a 4 Hz
/// syllable envelope. Peak amplitude about 0.5.
pub fn speech_like(sample_rate: f64, duration: f64) -> Vec<f64> {
    let n = (sample_rate * duration).round() as usize;
    let formants = [(600.0, 120.0), (1400.0, 180.0), (2600.0, 250.0)];
    let nyquist = 0.5 * sample_rate;
    let mut phase = 0.0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / sample_rate;
        let f0 = 140.0 + 30.0 * (TAU * 0.7 * t).sin();
        phase += TAU * f0 / sample_rate;
        let syllable = (TAU * 4.0 * t).sin().max(0.0).powf(0.6);
        let mut s = 0.0;
        let mut k = 1.0;
        while k * f0 < nyquist.min(4000.0) {
            let f = k * f0;
            let gain: f64 = formants
                .iter()
                .map(|&(c, bw): &(f64, f64)| (-0.5 * ((f - c) / bw).powi(2)).exp())
                .sum::<f64>()
                + 0.05 / k;
            s += gain * (k * phase).sin();
            k += 1.0;
        }
        out.push(0.12 * syllable * s);
    }
    out
}

/// Train of 3 ms Gaussian-windowed clicks at `rate_hz`, alternating polarity.
pub fn click_train(sample_rate: f64, duration: f64, rate_hz: f64) -> Vec<f64> {
    let n = (sample_rate * duration).round() as usize;
    let width = 0.0005;
    let carrier = 0.2 * sample_rate;
    let period = 1.0 / rate_hz;
    (0..n)
        .map(|i| {
            let t = i as f64 / sample_rate;
            let k = (t / period).round();
            let dt = t - k * period - 0.5 * period;
            let dt = if dt < -0.5 * period { dt + period } else { dt };
            let sign = if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
            if dt.abs() > 6.0 * width {
                0.0
            } else {
                sign * 0.8 * (-0.5 * (dt / width).powi(2)).exp() * (TAU * carrier * dt).cos()
            }
        })
        .collect()
}

/// Equal-amplitude sinusoids; total peak amplitude at most 0.9.
pub fn tones(sample_rate: f64, duration: f64, freqs: &[f64]) -> Vec<f64> {
    let n = (sample_rate * duration).round() as usize;
    let a = 0.9 / freqs.len().max(1) as f64;
    (0..n)
        .map(|i| {
            let t = i as f64 / sample_rate;
            freqs.iter().map(|f| a * (TAU * f * t).sin()).sum()
        })
        .collect()
}
