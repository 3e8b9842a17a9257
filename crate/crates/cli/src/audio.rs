//! WAV and raw float64 input, float WAV output.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{CliError, Result};

/// Mono samples in `[-1, 1]` (for PCM) and their rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Audio {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    /// Channel count of the source before downmixing.
    pub channels: u16,
}

/// Reads `path` as WAV, or as raw little-endian float64 when `raw_rate` is set.
pub fn read_input(path: &Path, raw_rate: Option<f64>) -> Result<Audio> {
    match raw_rate {
        Some(rate) => read_raw_f64(path, rate),
        None => read_wav(path),
    }
}

pub fn read_wav(path: &Path) -> Result<Audio> {
    let reader = WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    let frames = decode(reader, path, spec)?;
    let channels = spec.channels.max(1) as usize;
    if frames.len() % channels != 0 {
        return Err(CliError::Data(format!("{}: truncated final frame", path.display())));
    }
    let samples = if channels == 1 {
        frames
    } else {
        eprintln!(
            "warning: {} has {channels} channels; averaging them to mono",
            path.display()
        );
        frames
            .chunks_exact(channels)
            .map(|f| f.iter().sum::<f64>() / channels as f64)
            .collect()
    };
    if samples.is_empty() {
        return Err(CliError::Data(format!("{}: no samples", path.display())));
    }
    Ok(Audio {
        samples,
        sample_rate: spec.sample_rate as f64,
        channels: spec.channels,
    })
}

fn decode(reader: WavReader<BufReader<File>>, path: &Path, spec: WavSpec) -> Result<Vec<f64>> {
    match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (16 | 24)) => {
            let scale = 1.0 / (1i64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale).map_err(|e| wav_error(path, e)))
                .collect()
        }
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64).map_err(|e| wav_error(path, e)))
            .collect(),
        (format, bits) => Err(CliError::Data(format!(
            "{}: unsupported WAV encoding ({bits}-bit {}); use 16/24-bit PCM or 32-bit float",
            path.display(),
            match format {
                SampleFormat::Int => "integer",
                SampleFormat::Float => "float",
            }
        ))),
    }
}

fn wav_error(path: &Path, e: hound::Error) -> CliError {
    match e {
        hound::Error::IoError(io) => CliError::io(path, io),
        other => CliError::Data(format!("{}: {other}", path.display())),
    }
}

pub fn read_raw_f64(path: &Path, sample_rate: f64) -> Result<Audio> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(CliError::Usage(format!("raw sample rate must be > 0, got {sample_rate}")));
    }
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    if bytes.is_empty() || bytes.len() % 8 != 0 {
        return Err(CliError::Data(format!(
            "{}: {} bytes is not a whole number of float64 samples",
            path.display(),
            bytes.len()
        )));
    }
    let samples: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(CliError::Data(format!("{}: non-finite sample", path.display())));
    }
    Ok(Audio {
        samples,
        sample_rate,
        channels: 1,
    })
}

/// 32-bit float mono WAV.
pub fn write_wav(path: &Path, samples: &[f64], sample_rate: f64) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: sample_rate.round() as u32,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut w = WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for &s in samples {
        w.write_sample(s as f32).map_err(|e| wav_error(path, e))?;
    }
    w.finalize().map_err(|e| wav_error(path, e))
}
