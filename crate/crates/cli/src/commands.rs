use std::path::{Path, PathBuf};

use gafzeros::convergence::{mean_sup_differences, ConvergenceConfig};
use gafzeros::filtering::{apply_mask, build_mask, calibrate, CalibrationProfile, CalibrationSettings, EmptyDiskPolicy, MaskConfig, MaskKind};
use gafzeros::grid::{geometric_scales, GridSpec};
use gafzeros::pipeline::{analyze, analyze_white_noise, Analysis, AnalysisConfig, DEFAULT_F_MAX_RATIO};
use gafzeros::stats::ReferenceStats;
use gafzeros::tables::{DefaultRadii, TableAccumulator};
use gafzeros::{generate_white_noise, inverse_cwt, NoiseKind, Rect, SignalBuffer, WaveletParams};
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::artifacts::*;
use crate::audio::{read_input, write_wav};
use crate::error::{CliError, Result};
use crate::synth;

fn usage(e: gafzeros::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(CliError::Usage(format!("--alpha must be > 1, got {alpha}")));
    }
    Ok(())
}

fn samples_for(sample_rate: f64, duration: f64) -> Result<usize> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(CliError::Usage(format!("sample rate must be > 0, got {sample_rate}")));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(CliError::Usage(format!("duration must be > 0, got {duration}")));
    }
    Ok((sample_rate * duration).round() as usize)
}

/// Analysis settings for signals sampled at `sample_rate`.
pub fn analysis_config(g: &GridArgs, sample_rate: f64) -> Result<AnalysisConfig> {
    check_alpha(g.alpha)?;
    if g.voices == 0 || !(g.octaves > 0.0) {
        return Err(CliError::Usage("--voices and --octaves must be positive".into()));
    }
    let params = WaveletParams::new(g.alpha).map_err(usage)?;
    let f_hi = g.f_max.unwrap_or(DEFAULT_F_MAX_RATIO * sample_rate);
    let spec = GridSpec::from_frequency_range(&params, sample_rate, f_hi / g.octaves.exp2(), f_hi, g.voices).map_err(usage)?;
    AnalysisConfig::new(g.alpha, spec).map_err(usage)
}

/// Rectangle of the grid rows zeros can occupy, each row standing for its
/// logarithmic cell.
fn zero_band(a: &Analysis) -> Rect {
    let s = a.grid().scales();
    let half = a.grid().scale_ratio().sqrt();
    let (lo, hi) = (s[1] / half, s[s.len() - 2] * half);
    Rect {
        t_min: a.window.t_min,
        t_max: a.window.t_max,
        y_min: lo.max(a.window.y_min),
        y_max: hi.min(a.window.y_max),
    }
}

fn expected_zeros(alpha: f64, r: &Rect) -> f64 {
    alpha / (4.0 * std::f64::consts::PI) * (r.t_max - r.t_min) * (1.0 / r.y_min - 1.0 / r.y_max)
}

fn window_json(r: &Rect) -> serde_json::Value {
    json!({"t_min": r.t_min, "t_max": r.t_max, "y_min": r.y_min, "y_max": r.y_max})
}

pub fn simulate_gaf(args: &SimulateArgs) -> Result<()> {
    let n = samples_for(args.noise.sample_rate, args.noise.duration)?;
    let config = analysis_config(&args.grid, args.noise.sample_rate)?;
    create_dir(&args.out_dir)?;
    let a = analyze_white_noise(&config, n, args.noise.noise_kind.into(), args.noise.seed)?;
    let zeros = a.zeros.points();
    let band = zero_band(&a);
    let in_band = zeros.iter().filter(|z| band.contains(z)).count();
    let expected = expected_zeros(config.alpha, &band);

    let dir = &args.out_dir;
    write_zeros_csv(&dir.join("zeros.csv"), zeros)?;
    let cover = Rect::grid_coverage(a.grid());
    write_zero_svg(&dir.join("zeros.svg"), zeros, (cover.t_min, cover.t_max), (cover.y_min, cover.y_max))?;
    let zmap = write_image(&dir.join("zeros"), &zero_raster(a.grid(), zeros, args.max_width), args.image_format)?;
    let smap = write_image(&dir.join("scalogram"), &log_modulus_raster(&a.scalogram, args.max_width, 80.0), args.image_format)?;
    let results = json!({
        "n_samples": n,
        "n_scales": a.grid().n_scales(),
        "n_zeros": zeros.len(),
        "window": window_json(&a.window),
        "count_region": window_json(&band),
        "n_zeros_in_region": in_band,
        "expected_in_region": expected,
        "analysis": config,
        "artifacts": ["zeros.csv", "zeros.svg", file_name(&zmap), file_name(&smap)],
    });
    write_report(&dir.join("simulate-gaf.json"), "simulate-gaf", args, &results)?;
    println!(
        "{} zeros; {in_band} in the counting region (intensity integral {expected:.1})",
        zeros.len()
    );
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn tables(args: &TablesArgs) -> Result<()> {
    if args.seeds == 0 || args.pcf_seeds == 0 || args.pcf_seeds > args.seeds {
        return Err(CliError::Usage("need 1 <= --pcf-seeds <= --seeds".into()));
    }
    let n = samples_for(args.noise.sample_rate, args.noise.duration)?;
    let config = analysis_config(&args.grid, args.noise.sample_rate)?;
    let stats = ReferenceStats::new(config.alpha).map_err(usage)?;
    create_dir(&args.out_dir)?;
    let mut acc = TableAccumulator::new(DefaultRadii::standard(), config.alpha)?;
    let mut pcf_acc = None;
    let seeds: Vec<u64> = (0..args.seeds as u64).map(|i| args.noise.seed + i).collect();
    for (i, &seed) in seeds.iter().enumerate() {
        let a = analyze_white_noise(&config, n, args.noise.noise_kind.into(), seed)?;
        acc.add_pattern(a.zeros.points(), a.grid(), &a.window)?;
        if i + 1 == args.pcf_seeds {
            pcf_acc = Some(acc.clone());
        }
        eprintln!("realization {}/{} (seed {seed}) done", i + 1, seeds.len());
    }
    let pcf_acc = pcf_acc.expect("pcf_seeds <= seeds");
    if acc.n_centers() == 0 {
        return Err(CliError::Data("no centers inside the region of interest; use a longer duration".into()));
    }
    let counts = acc.count_rows(&stats)?;
    let pcf = pcf_acc.pcf_rows(&stats)?;
    write_csv(&args.out_dir.join("counts.csv"), &counts)?;
    write_csv(&args.out_dir.join("pcf.csv"), &pcf)?;
    let results = json!({
        "seeds": seeds,
        "pcf_seeds": &seeds[..args.pcf_seeds],
        "n_centers": acc.n_centers(),
        "radii": DefaultRadii::standard(),
        "analysis": config,
        "counts": counts,
        "pcf": pcf,
    });
    write_report(&args.out_dir.join("tables.json"), "tables", args, &results)?;
    println!("r1       mu      mu_hat  sigma2  sigma2_hat");
    for r in &counts {
        println!("{:.4}  {:.4}  {:.4}  {:.4}  {:.4}", r.r1, r.mu, r.mu_hat, r.sigma2, r.sigma2_hat);
    }
    Ok(())
}

fn empty_disk(arg: EmptyDiskArg) -> EmptyDiskPolicy {
    match arg {
        EmptyDiskArg::MaxDeviation => EmptyDiskPolicy::MaxDeviation,
        EmptyDiskArg::Skip => EmptyDiskPolicy::Skip,
    }
}

/// White-noise settings of a calibration run, before validation.
struct CalibrationRun {
    kind: NoiseKind,
    seeds: usize,
    quantile: f64,
    seed: u64,
    stride: usize,
    policy: EmptyDiskPolicy,
}

fn run_calibration(analysis: AnalysisConfig, len: usize, run: CalibrationRun) -> Result<CalibrationProfile> {
    if run.seeds == 0 || run.stride == 0 {
        return Err(CliError::Usage("seed count and center stride must be >= 1".into()));
    }
    if !(run.quantile > 0.0 && run.quantile < 1.0) {
        return Err(CliError::Usage(format!("quantile level must lie in (0, 1), got {}", run.quantile)));
    }
    let mut settings = CalibrationSettings::new(analysis, len);
    settings.noise_kind = run.kind;
    settings.n_seeds = run.seeds;
    settings.quantile_level = run.quantile;
    settings.seed = run.seed;
    settings.center_stride = run.stride;
    let mut skeleton = MaskConfig::standard();
    skeleton.empty_disk = run.policy;
    Ok(calibrate(&settings, &skeleton)?)
}

fn write_profile(path: &Path, profile: &CalibrationProfile) -> Result<()> {
    let s = profile.to_json().map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    std::fs::write(path, s + "\n").map_err(|e| CliError::io(path, e))
}

pub fn calibrate_cmd(args: &CalibrateArgs) -> Result<()> {
    let n = samples_for(args.noise.sample_rate, args.noise.duration)?;
    let config = analysis_config(&args.grid, args.noise.sample_rate)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let run = CalibrationRun {
        kind: args.noise.noise_kind.into(),
        seeds: args.seeds,
        quantile: args.quantile,
        seed: args.noise.seed,
        stride: args.center_stride,
        policy: empty_disk(args.empty_disk),
    };
    let profile = run_calibration(config, n, run)?;
    write_profile(&args.out, &profile)?;
    println!(
        "thresholds: intensity {:.4}, pcf {:.4}, combined {:.4} ({} pooled centers)",
        profile.config.b_intensity, profile.config.b_pcf, profile.config.b_combined, profile.n_centers
    );
    Ok(())
}

/// Signal to analyze plus the noise-free version when noise was mixed in.
struct Loaded {
    signal: SignalBuffer,
    clean: Option<Vec<f64>>,
    channels: u16,
    input_snr_db: Option<f64>,
}

fn load(args: &InputArgs) -> Result<Loaded> {
    let (samples, rate, channels, pure_noise) = match (&args.input, args.synthetic) {
        (Some(path), _) => {
            let a = read_input(path, args.raw_rate)?;
            (a.samples, a.sample_rate, a.channels, false)
        }
        (None, Some(kind)) => {
            let n = samples_for(args.sample_rate, args.duration)?;
            let (fs, d) = (args.sample_rate, args.duration);
            let s = match kind {
                Synthetic::Speech => synth::speech_like(fs, d),
                Synthetic::Clicks => synth::click_train(fs, d, 4.0),
                Synthetic::Tones => {
                    if args.tone_hz.iter().any(|f| !(*f > 0.0 && *f < 0.5 * fs)) {
                        return Err(CliError::Usage("--tone-hz values must lie in (0, Nyquist)".into()));
                    }
                    synth::tones(fs, d, &args.tone_hz)
                }
                Synthetic::Noise => vec![0.0; n],
            };
            (s, fs, 1, kind == Synthetic::Noise)
        }
        (None, None) => return Err(CliError::Usage("give --input or --synthetic".into())),
    };
    let dt = 1.0 / rate;
    if pure_noise {
        if args.snr_db.is_some() {
            eprintln!("warning: --snr-db has no meaning for a pure-noise input; ignored");
        }
        let noise = generate_white_noise(samples.len(), dt, NoiseKind::Real, args.seed)?;
        return Ok(Loaded {
            signal: noise,
            clean: None,
            channels,
            input_snr_db: None,
        });
    }
    let Some(snr) = args.snr_db else {
        return Ok(Loaded {
            signal: SignalBuffer::from_real(&samples, dt, 0.0)?,
            clean: None,
            channels,
            input_snr_db: None,
        });
    };
    if !snr.is_finite() {
        return Err(CliError::Usage(format!("--snr-db must be finite, got {snr}")));
    }
    let power = samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64;
    if power == 0.0 {
        return Err(CliError::Data("input is silent; a signal-to-noise ratio is undefined".into()));
    }
    // generated noise has variance dt per sample
    let gain = (power / 10f64.powf(snr / 10.0) / dt).sqrt();
    let noise = generate_white_noise(samples.len(), dt, NoiseKind::Real, args.seed)?.real_samples();
    let mixed: Vec<f64> = samples.iter().zip(&noise).map(|(s, n)| s + gain * n).collect();
    let noise_power = noise.iter().map(|n| gain * gain * n * n).sum::<f64>() / samples.len() as f64;
    Ok(Loaded {
        signal: SignalBuffer::from_real(&mixed, dt, 0.0)?,
        clean: Some(samples),
        channels,
        input_snr_db: Some(10.0 * (power / noise_power).log10()),
    })
}

/// `10·log10(‖reference‖² / ‖estimate − reference‖²)` over `range`.
fn snr_db(reference: &[f64], estimate: &[f64], range: std::ops::Range<usize>) -> f64 {
    let (mut p, mut e) = (0.0, 0.0);
    for i in range {
        p += reference[i] * reference[i];
        e += (estimate[i] - reference[i]).powi(2);
    }
    10.0 * (p / e).log10()
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{what} contains non-finite samples")))
    }
}

#[derive(Serialize)]
struct MaskSummary {
    kind: MaskKind,
    threshold: f64,
    coverage: f64,
    image: String,
}

pub fn filter(args: &FilterArgs) -> Result<()> {
    let profile = match &args.profile {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Some(CalibrationProfile::from_json(&text).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    create_dir(&args.out_dir)?;
    let loaded = load(&args.input)?;
    let signal = &loaded.signal;
    let fs = signal.sample_rate();

    let profile = match profile {
        Some(p) => {
            if (p.grid.sample_rate - fs).abs() > 1e-6 * fs {
                return Err(CliError::Data(format!(
                    "input sampled at {fs} Hz but the profile was calibrated at {} Hz",
                    p.grid.sample_rate
                )));
            }
            p
        }
        None => {
            eprintln!(
                "warning: no --profile given; calibrating on {} white-noise realizations of this length",
                args.calibration_seeds
            );
            let config = analysis_config(&args.grid, fs)?;
            let run = CalibrationRun {
                kind: NoiseKind::Real,
                seeds: args.calibration_seeds,
                quantile: 0.999,
                seed: args.input.seed,
                stride: 8,
                policy: EmptyDiskPolicy::default(),
            };
            let p = run_calibration(config, signal.len(), run)?;
            write_profile(&args.out_dir.join("profile.json"), &p)?;
            p
        }
    };
    let config = AnalysisConfig::new(profile.alpha, profile.grid.clone()).map_err(usage)?;
    let analysis = analyze(signal, &config)?;
    profile.check_grid(analysis.grid())?;
    let roi = profile.roi(&analysis.window)?;
    let dir = &args.out_dir;

    let selected: MaskKind = args.mask.into();
    let mut summaries = Vec::new();
    let mut chosen = None;
    for kind in MaskKind::ALL {
        let mask = build_mask(&analysis, kind, &profile)?;
        let name = format!("mask_{}", kind_name(kind));
        let img = write_image(&dir.join(&name), &mask_raster(mask.grid(), mask.values(), args.max_width), args.image_format)?;
        summaries.push(MaskSummary {
            kind,
            threshold: profile.config.threshold(kind),
            coverage: mask.coverage(&roi),
            image: file_name(&img),
        });
        if kind == selected {
            chosen = Some(mask);
        }
    }
    let mut mask = chosen.expect("selected kind is one of ALL");
    if args.dilate_times > 0 || args.dilate_scales > 0 {
        mask = mask.dilated(args.dilate_times, args.dilate_scales);
    }
    let applied_coverage = mask.coverage(&roi);
    let masked = apply_mask(&analysis.scalogram, &mask, args.interpolate)?;
    drop(mask);
    let out = inverse_cwt(&masked)?.real_samples();
    check_finite(&out, "reconstruction")?;
    write_wav(&dir.join("filtered.wav"), &out, fs)?;
    let s_img = write_image(&dir.join("scalogram"), &log_modulus_raster(&analysis.scalogram, args.max_width, 80.0), args.image_format)?;
    let f_img = write_image(&dir.join("filtered_scalogram"), &log_modulus_raster(&masked, args.max_width, 80.0), args.image_format)?;
    drop(masked);
    write_zeros_csv(&dir.join("zeros.csv"), analysis.zeros.points())?;

    // Signal-to-noise ratios inside the analyzed band and the trusted window.
    let snr = match &loaded.clean {
        Some(clean) => {
            let clean_band = inverse_cwt(&gafzeros::forward_cwt(
                &SignalBuffer::from_real(clean, signal.sample_interval(), 0.0)?,
                &config.params(),
                analysis.grid(),
                &config.cwt,
            )?)?
            .real_samples();
            let noisy_band = inverse_cwt(&analysis.scalogram)?.real_samples();
            let lo = (analysis.window.t_min * fs).ceil() as usize;
            let hi = ((analysis.window.t_max * fs).floor() as usize).min(out.len());
            Some(json!({
                "input_db": loaded.input_snr_db,
                "input_band_db": snr_db(&clean_band, &noisy_band, lo..hi),
                "output_band_db": snr_db(&clean_band, &out, lo..hi),
            }))
        }
        None => None,
    };

    let in_roi = analysis.zeros.points().iter().filter(|z| roi.contains(z)).count();
    let results = json!({
        "n_samples": signal.len(),
        "sample_rate": fs,
        "source_channels": loaded.channels,
        "n_zeros": analysis.zeros.len(),
        "n_zeros_in_roi": in_roi,
        "window": window_json(&analysis.window),
        "roi_margin": profile.config.roi_margin(),
        "selected_mask": selected,
        "applied_coverage": applied_coverage,
        "masks": summaries,
        "snr": snr,
        "profile": profile,
        "artifacts": ["filtered.wav", "zeros.csv", file_name(&s_img), file_name(&f_img)],
    });
    write_report(&dir.join("report.json"), "filter", args, &results)?;
    for m in &summaries {
        println!("{:<9} threshold {:.4}  coverage {:.4}%", kind_name(m.kind), m.threshold, 100.0 * m.coverage);
    }
    Ok(())
}

fn kind_name(k: MaskKind) -> &'static str {
    match k {
        MaskKind::Intensity => "intensity",
        MaskKind::Pcf => "pcf",
        MaskKind::Combined => "combined",
    }
}

pub fn analyze_cmd(args: &AnalyzeArgs) -> Result<()> {
    create_dir(&args.out_dir)?;
    let loaded = load(&args.input)?;
    let config = analysis_config(&args.grid, loaded.signal.sample_rate())?;
    let a = analyze(&loaded.signal, &config)?;
    let dir = &args.out_dir;
    write_zeros_csv(&dir.join("zeros.csv"), a.zeros.points())?;
    let s_img = write_image(&dir.join("scalogram"), &log_modulus_raster(&a.scalogram, args.max_width, 80.0), args.image_format)?;
    let z_img = write_image(&dir.join("zeros"), &zero_raster(a.grid(), a.zeros.points(), args.max_width), args.image_format)?;
    let band = zero_band(&a);
    let in_band = a.zeros.points().iter().filter(|z| band.contains(z)).count();
    let results = json!({
        "n_samples": loaded.signal.len(),
        "sample_rate": loaded.signal.sample_rate(),
        "source_channels": loaded.channels,
        "input_snr_db": loaded.input_snr_db,
        "n_scales": a.grid().n_scales(),
        "n_zeros": a.zeros.len(),
        "window": window_json(&a.window),
        "count_region": window_json(&band),
        "n_zeros_in_region": in_band,
        "expected_in_region_for_noise": expected_zeros(config.alpha, &band),
        "analysis": config,
        "artifacts": ["zeros.csv", file_name(&s_img), file_name(&z_img)],
    });
    write_report(&dir.join("analyze.json"), "analyze", args, &results)?;
    println!("{} zeros ({in_band} in the counting region)", a.zeros.len());
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceRow {
    step: usize,
    coarse_interval: f64,
    fine_interval: f64,
    mean_sup_difference: f64,
}

pub fn convergence_check(args: &ConvergenceArgs) -> Result<()> {
    check_alpha(args.alpha)?;
    if args.levels < 2 || args.seeds == 0 {
        return Err(CliError::Usage("need --levels >= 2 and --seeds >= 1".into()));
    }
    let factor = 1usize << (args.levels - 1);
    if args.finest_len == 0 || !args.finest_len.is_multiple_of(factor) {
        return Err(CliError::Usage(format!(
            "--finest-len must be a positive multiple of {factor} for {} levels",
            args.levels
        )));
    }
    samples_for(args.sample_rate, 1.0)?;
    let dt = 1.0 / args.sample_rate;
    let mut config = ConvergenceConfig::standard(args.alpha, args.finest_len, dt).map_err(usage)?;
    config.levels = args.levels;
    config.scales = geometric_scales(40.0 * dt * factor as f64, 4, 9).map_err(usage)?;
    config.noise_kind = args.noise_kind.into();
    let seeds: Vec<u64> = (0..args.seeds as u64).map(|i| args.seed + i).collect();
    let means = mean_sup_differences(&config, &seeds)?;
    // means[0] compares the two coarsest resolutions
    let rows: Vec<ConvergenceRow> = means
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let coarse = dt * (factor >> i) as f64;
            ConvergenceRow {
                step: i + 1,
                coarse_interval: coarse,
                fine_interval: 0.5 * coarse,
                mean_sup_difference: m,
            }
        })
        .collect();
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_csv(&args.out, &rows)?;
    let decreasing = means.windows(2).all(|w| w[1] < w[0]);
    let sidecar: PathBuf = args.out.with_extension("json");
    write_report(&sidecar, "convergence-check", args, &json!({"config": config, "seeds": seeds, "rows": rows, "decreasing": decreasing}))?;
    for r in &rows {
        println!("dt {:.3e} -> {:.3e}: {:.6}", r.coarse_interval, r.fine_interval, r.mean_sup_difference);
    }
    if !decreasing {
        return Err(CliError::Numerical("mean sup-difference does not decrease with resolution".into()));
    }
    Ok(())
}
