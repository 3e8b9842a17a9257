use gafzeros::filtering::*;
use gafzeros::grid::GridSpec;
use gafzeros::pipeline::{analyze, analyze_white_noise, Analysis, AnalysisConfig};
use gafzeros::signal::{generate_white_noise, NoiseKind, SignalBuffer};
use gafzeros::{Error, WaveletParams};
use num_complex::Complex64;
use std::sync::OnceLock;

const FS: f64 = 8000.0;
const LEN: usize = 16000;

fn config() -> AnalysisConfig {
    AnalysisConfig::standard(300.0, FS, 32).unwrap()
}

fn settings(n_seeds: usize, level: f64) -> CalibrationSettings {
    let mut s = CalibrationSettings::new(config(), LEN);
    s.n_seeds = n_seeds;
    s.quantile_level = level;
    s.seed = 5;
    s
}

fn profile() -> &'static CalibrationProfile {
    static P: OnceLock<CalibrationProfile> = OnceLock::new();
    P.get_or_init(|| calibrate(&settings(6, 0.999), &MaskConfig::standard()).unwrap())
}

fn noise_analysis(seed: u64) -> Analysis {
    analyze_white_noise(&config(), LEN, NoiseKind::Real, seed).unwrap()
}

#[test]
fn calibration_is_deterministic() {
    let again = calibrate(&settings(6, 0.999), &MaskConfig::standard()).unwrap();
    assert_eq!(&again, profile());
    assert_eq!(again.to_json().unwrap(), profile().to_json().unwrap());
}

#[test]
fn profile_json_roundtrip() {
    let json = profile().to_json().unwrap();
    let back = CalibrationProfile::from_json(&json).unwrap();
    assert_eq!(&back, profile());
    let bumped = json.replacen("\"schema_version\": 1", "\"schema_version\": 99", 1);
    assert!(CalibrationProfile::from_json(&bumped).is_err());
}

#[test]
fn spread_shrinks_with_disk_radius() {
    let p = profile();
    for row in &p.sigma_hat {
        assert!(row.windows(2).all(|w| w[1] < w[0]), "{row:?}");
    }
    // r0 = 0.0854, r1 = 0.1280
    assert!((p.sigma_hat[1][2] - 0.121).abs() < 0.02, "{}", p.sigma_hat[1][2]);
    assert!(p.config.a_kl.iter().flatten().all(|a| *a > 0.0));
}

#[test]
fn intensity_threshold_is_in_expected_range() {
    let b = profile().config.b_intensity;
    assert!((3.5..=5.5).contains(&b), "{b}");
}

#[test]
fn lower_quantile_gives_lower_thresholds() {
    let median = calibrate(&settings(2, 0.5), &MaskConfig::standard()).unwrap();
    let high = profile();
    for kind in MaskKind::ALL {
        assert!(median.config.threshold(kind) < 0.5 * high.config.threshold(kind));
    }
}

#[test]
fn fresh_noise_is_suppressed() {
    let p = profile();
    for seed in 900..903 {
        let a = noise_analysis(seed);
        let roi = p.roi(&a.window).unwrap();
        for kind in MaskKind::ALL {
            let mask = build_mask(&a, kind, p).unwrap();
            assert!(mask.values().iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(mask.coverage(&roi) <= 0.005, "{kind:?}: {}", mask.coverage(&roi));
            // masked energy inside the region of interest
            let masked = apply_mask(&a.scalogram, &mask, false).unwrap();
            let (mut kept, mut total) = (0.0, 0.0);
            for (j, range) in roi.grid_rows(a.grid()) {
                for k in range {
                    total += a.scalogram.get(j, k).norm_sqr();
                    kept += masked.get(j, k).norm_sqr();
                }
            }
            assert!(kept / total <= 0.01, "{kind:?}: {}", kept / total);
        }
    }
}

#[test]
fn mask_is_zero_outside_region_and_monotone_in_threshold() {
    let p = profile();
    let a = noise_analysis(77);
    let roi = p.roi(&a.window).unwrap();
    let inside = roi.grid_mask(a.grid());
    let mut lax = p.clone();
    lax.config.b_combined *= 0.5;
    let strict = build_mask(&a, MaskKind::Combined, p).unwrap();
    let loose = build_mask(&a, MaskKind::Combined, &lax).unwrap();
    for (i, (s, l)) in strict.values().iter().zip(loose.values()).enumerate() {
        assert!(s <= l);
        if !inside[i] {
            assert_eq!(*l, 0.0);
        }
    }
    assert!(loose.coverage(&roi) > strict.coverage(&roi));
}

#[test]
fn strong_tone_is_detected() {
    let p = profile();
    let cfg = config();
    let params = WaveletParams::new(300.0).unwrap();
    let f = 700.0;
    let noise = generate_white_noise(LEN, 1.0 / FS, NoiseKind::Real, 4242).unwrap();
    // tone power A²/2 six decibels above the noise power per sample
    let amp = (2.0 / FS).sqrt() * 2.0;
    let tone: Vec<f64> = (0..LEN).map(|i| amp * (2.0 * std::f64::consts::PI * f * i as f64 / FS).cos()).collect();
    let tone = SignalBuffer::from_real(&tone, 1.0 / FS, 0.0).unwrap();
    let mix = noise.linear_combination(Complex64::new(1.0, 0.0), &tone, Complex64::new(1.0, 0.0)).unwrap();
    let a = analyze(&mix, &cfg).unwrap();
    let mask = build_mask(&a, MaskKind::Combined, p).unwrap();
    let roi = p.roi(&a.window).unwrap();
    let row = a.grid().nearest_scale_index(params.scale_for_frequency(f));
    let (_, range) = roi.grid_rows(a.grid()).into_iter().find(|(j, _)| *j == row).expect("tone row inside the region");
    let on = range.clone().filter(|&k| mask.get(row, k) > 0.0).count();
    assert!(on as f64 > 0.5 * range.len() as f64, "{on} of {}", range.len());
}

#[test]
fn mask_application_identities() {
    let a = noise_analysis(3);
    let grid = a.grid().clone();
    let ones = Mask::constant(grid.clone(), 1.0).unwrap();
    let zeros = Mask::constant(grid.clone(), 0.0).unwrap();
    assert_eq!(apply_mask(&a.scalogram, &ones, false).unwrap(), a.scalogram);
    assert!(apply_mask(&a.scalogram, &zeros, false).unwrap().values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    let binary: Vec<f64> = (0..grid.n_times() * grid.n_scales()).map(|i| ((i / 7) % 2) as f64).collect();
    let m = Mask::new(grid.clone(), binary).unwrap();
    let once = apply_mask(&a.scalogram, &m, false).unwrap();
    assert_eq!(apply_mask(&once, &m, false).unwrap(), once);
}

#[test]
fn mismatched_profile_is_rejected() {
    let p = profile();
    let other = AnalysisConfig::standard(300.0, FS, 16).unwrap();
    let a = analyze_white_noise(&other, LEN, NoiseKind::Real, 1).unwrap();
    assert!(matches!(build_mask(&a, MaskKind::Intensity, p), Err(Error::GridMismatch(_))));
    let params = WaveletParams::new(120.0).unwrap();
    let spec = GridSpec { ..p.grid.clone() };
    let mut cfg = AnalysisConfig::new(120.0, spec).unwrap();
    cfg.grid.min_scale = p.grid.min_scale;
    let a = analyze_white_noise(&cfg, LEN, NoiseKind::Real, 1).unwrap();
    assert!(params.alpha() == 120.0);
    assert!(matches!(build_mask(&a, MaskKind::Pcf, p), Err(Error::GridMismatch(_))));
}

#[test]
fn interpolated_mask_on_coarser_grid() {
    let a = noise_analysis(3);
    let m = Mask::constant(a.grid().clone(), 1.0).unwrap();
    let other = analyze_white_noise(&AnalysisConfig::standard(300.0, FS, 16).unwrap(), LEN, NoiseKind::Real, 3).unwrap();
    assert!(apply_mask(&other.scalogram, &m, false).is_err());
    let applied = apply_mask(&other.scalogram, &m, true).unwrap();
    assert_eq!(applied, other.scalogram);
}
