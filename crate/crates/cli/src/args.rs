use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "gafzeros", version, about = "Signal detection from the zeros of the Cauchy wavelet transform")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Zero pattern of one white-noise realization (CSV, raster, SVG).
    SimulateGaf(SimulateArgs),
    /// Empirical vs closed-form disk counts and pair correlations.
    Tables(TablesArgs),
    /// Calibrate mask thresholds on white noise and write a profile.
    Calibrate(CalibrateArgs),
    /// Mask and reconstruct a signal.
    Filter(FilterArgs),
    /// Scalogram and zeros of a signal, without filtering.
    Analyze(AnalyzeArgs),
    /// Sup-differences of transforms of one noise under dyadic refinement.
    ConvergenceCheck(ConvergenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseArg {
    Real,
    Complex,
}

impl From<NoiseArg> for gafzeros::NoiseKind {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Real => gafzeros::NoiseKind::Real,
            NoiseArg::Complex => gafzeros::NoiseKind::Complex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskArg {
    Intensity,
    Pcf,
    Combined,
}

impl From<MaskArg> for gafzeros::filtering::MaskKind {
    fn from(m: MaskArg) -> Self {
        use gafzeros::filtering::MaskKind;
        match m {
            MaskArg::Intensity => MaskKind::Intensity,
            MaskArg::Pcf => MaskKind::Pcf,
            MaskArg::Combined => MaskKind::Combined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmptyDiskArg {
    MaxDeviation,
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImageFormat {
    Png,
    Pgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Synthetic {
    /// Harmonic glide with formant-shaped spectrum and syllabic envelope.
    Speech,
    /// Train of short broadband clicks.
    Clicks,
    /// Sum of steady sinusoids (see `--tone-hz`).
    Tones,
    /// White noise of unit spectral density (seeded by `--seed`).
    Noise,
}

/// Wavelet and grid parameters shared by all transforms.
#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    /// Order of the Cauchy wavelet.
    #[arg(long, default_value_t = 300.0)]
    pub alpha: f64,
    /// Scales per octave.
    #[arg(long, default_value_t = gafzeros::pipeline::DEFAULT_VOICES)]
    pub voices: usize,
    /// Highest analyzed frequency in Hz [default: 0.35 × sample rate].
    #[arg(long)]
    pub f_max: Option<f64>,
    /// Octaves analyzed below `--f-max`.
    #[arg(long, default_value_t = gafzeros::pipeline::DEFAULT_OCTAVES)]
    pub octaves: f64,
}

/// Length and rate of generated white noise.
#[derive(Debug, Clone, Args, Serialize)]
pub struct NoiseArgs {
    #[arg(long, default_value_t = 44100.0)]
    pub sample_rate: f64,
    /// Seconds per realization.
    #[arg(long, default_value_t = 2.0)]
    pub duration: f64,
    #[arg(long, value_enum, default_value_t = NoiseArg::Real)]
    pub noise_kind: NoiseArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(short, long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = ImageFormat::Png)]
    pub image_format: ImageFormat,
    /// Widest raster in pixels; longer time axes are decimated.
    #[arg(long, default_value_t = 2000)]
    pub max_width: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TablesArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Realizations pooled for the disk-count table.
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    /// Realizations pooled for the pair-correlation tables.
    #[arg(long, default_value_t = 1)]
    pub pcf_seeds: usize,
    #[arg(short, long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// White-noise realizations.
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0.999)]
    pub quantile: f64,
    /// Pool every n-th time index of each row.
    #[arg(long, default_value_t = 8)]
    pub center_stride: usize,
    /// Pair-correlation statistic at centers without zeros in the disk.
    #[arg(long, value_enum, default_value_t = EmptyDiskArg::MaxDeviation)]
    pub empty_disk: EmptyDiskArg,
    /// Profile JSON to write.
    #[arg(short, long)]
    pub out: PathBuf,
}

/// Where the analyzed signal comes from.
#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Mono or stereo WAV (16/24-bit PCM or float), or raw float64 LE.
    #[arg(short, long, conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    /// Sample rate of a raw float64 input.
    #[arg(long)]
    pub raw_rate: Option<f64>,
    /// Generated test signal instead of a file.
    #[arg(long, value_enum)]
    pub synthetic: Option<Synthetic>,
    /// Sample rate of the synthetic signal.
    #[arg(long, default_value_t = 44100.0)]
    pub sample_rate: f64,
    /// Seconds of synthetic signal.
    #[arg(long, default_value_t = 2.0)]
    pub duration: f64,
    /// Tone frequencies in Hz for `--synthetic tones`.
    #[arg(long, value_delimiter = ',', default_value = "440")]
    pub tone_hz: Vec<f64>,
    /// Mix in white noise at this signal-to-noise ratio (dB).
    #[arg(long)]
    pub snr_db: Option<f64>,
    /// Seed of the mixed-in noise and of any automatic calibration.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FilterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Calibration profile; calibrated on the fly when absent.
    #[arg(short, long)]
    pub profile: Option<PathBuf>,
    /// Realizations for on-the-fly calibration.
    #[arg(long, default_value_t = 20)]
    pub calibration_seeds: usize,
    #[arg(long, value_enum, default_value_t = MaskArg::Combined)]
    pub mask: MaskArg,
    /// Sample the mask with interpolation between grid points.
    #[arg(long)]
    pub interpolate: bool,
    /// Dilate the applied mask by this many time samples on each side.
    #[arg(long, default_value_t = 0)]
    pub dilate_times: usize,
    /// Dilate the applied mask by this many scales on each side.
    #[arg(long, default_value_t = 0)]
    pub dilate_scales: usize,
    #[arg(short, long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = ImageFormat::Png)]
    pub image_format: ImageFormat,
    #[arg(long, default_value_t = 2000)]
    pub max_width: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(short, long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = ImageFormat::Png)]
    pub image_format: ImageFormat,
    #[arg(long, default_value_t = 2000)]
    pub max_width: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvergenceArgs {
    #[arg(long, default_value_t = 300.0)]
    pub alpha: f64,
    /// Samples at the finest resolution (a multiple of 2^(levels-1)).
    #[arg(long, default_value_t = 16384)]
    pub finest_len: usize,
    /// Sample rate at the finest resolution.
    #[arg(long, default_value_t = 44100.0)]
    pub sample_rate: f64,
    /// Number of resolutions compared.
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = NoiseArg::Real)]
    pub noise_kind: NoiseArg,
    /// CSV to write.
    #[arg(short, long)]
    pub out: PathBuf,
}
