//! CSV tables, JSON sidecars and raster images.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use gafzeros::{Scalogram, TimeScaleGrid, UHPPoint};
use serde::Serialize;

use crate::args::ImageFormat;
use crate::error::{CliError, Result};

/// Version of the JSON reports written next to every artifact.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Data(format!("{}: {other:?}", path.display())),
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct ZeroRow {
    x_seconds: f64,
    y_scale: f64,
}

pub fn write_zeros_csv(path: &Path, zeros: &[UHPPoint]) -> Result<()> {
    let rows: Vec<ZeroRow> = zeros
        .iter()
        .map(|z| ZeroRow {
            x_seconds: z.x,
            y_scale: z.y,
        })
        .collect();
    if rows.is_empty() {
        // csv writes no header for an empty record set
        return std::fs::write(path, "x_seconds,y_scale\n").map_err(|e| CliError::io(path, e));
    }
    write_csv(path, &rows)
}

#[derive(Serialize)]
struct Report<'a, C: Serialize, R: Serialize> {
    schema_version: u32,
    tool_version: &'a str,
    command: &'a str,
    config: &'a C,
    results: &'a R,
}

/// JSON report embedding the resolved configuration of `command`.
pub fn write_report<C: Serialize, R: Serialize>(path: &Path, command: &str, config: &C, results: &R) -> Result<()> {
    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        results,
    };
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// 8-bit grayscale image, row-major, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

/// Time columns per pixel so that the image is at most `max_width` wide.
fn decimation(n_times: usize, max_width: usize) -> usize {
    n_times.div_ceil(max_width.max(1)).max(1)
}

/// Reduces a scale-major `n_scales × n_times` field to one pixel row per
/// scale (smallest scale on top) by folding each column bin with `fold`.
fn reduce(grid: &TimeScaleGrid, max_width: usize, value: impl Fn(usize) -> f64, fold: fn(f64, f64) -> f64, init: f64) -> (usize, Vec<f64>) {
    let n_t = grid.n_times();
    let step = decimation(n_t, max_width);
    let width = n_t.div_ceil(step);
    let mut out = vec![init; width * grid.n_scales()];
    for j in 0..grid.n_scales() {
        for k in 0..n_t {
            let p = &mut out[j * width + k / step];
            *p = fold(*p, value(j * n_t + k));
        }
    }
    (width, out)
}

/// Log-modulus scalogram over `range_db` of dynamic range; brighter is larger.
pub fn log_modulus_raster(s: &Scalogram, max_width: usize, range_db: f64) -> Raster {
    let v = s.values();
    let (width, db) = reduce(s.grid(), max_width, |i| 20.0 * v[i].norm().max(1e-300).log10(), f64::max, f64::NEG_INFINITY);
    let top = db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pixels = db
        .iter()
        .map(|d| (255.0 * ((d - top + range_db) / range_db).clamp(0.0, 1.0)).round() as u8)
        .collect();
    Raster {
        width,
        height: s.grid().n_scales(),
        pixels,
    }
}

/// Mask values in `[0, 1]` averaged per pixel; white is kept.
pub fn mask_raster(grid: &TimeScaleGrid, values: &[f64], max_width: usize) -> Raster {
    let step = decimation(grid.n_times(), max_width);
    let (width, sums) = reduce(grid, max_width, |i| values[i], |a, b| a + b, 0.0);
    let n_t = grid.n_times();
    let pixels = sums
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let col = i % width;
            let n = (n_t - col * step).min(step) as f64;
            (255.0 * (s / n).clamp(0.0, 1.0)).round() as u8
        })
        .collect();
    Raster {
        width,
        height: grid.n_scales(),
        pixels,
    }
}

/// Black dots at the grid cells nearest to each zero on a white background.
pub fn zero_raster(grid: &TimeScaleGrid, zeros: &[UHPPoint], max_width: usize) -> Raster {
    let step = decimation(grid.n_times(), max_width);
    let width = grid.n_times().div_ceil(step);
    let mut pixels = vec![255u8; width * grid.n_scales()];
    for z in zeros {
        let (j, k) = (grid.nearest_scale_index(z.y), grid.nearest_time_index(z.x));
        pixels[j * width + k / step] = 0;
    }
    Raster {
        width,
        height: grid.n_scales(),
        pixels,
    }
}

/// Writes `raster` to `stem` with the extension of `format`; returns the path.
pub fn write_image(stem: &Path, raster: &Raster, format: ImageFormat) -> Result<PathBuf> {
    let path = stem.with_extension(match format {
        ImageFormat::Png => "png",
        ImageFormat::Pgm => "pgm",
    });
    let mut w = create(&path)?;
    match format {
        ImageFormat::Pgm => {
            write!(w, "P5\n{} {}\n255\n", raster.width, raster.height)
                .and_then(|_| w.write_all(&raster.pixels))
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(&path, e))?;
        }
        ImageFormat::Png => {
            let mut enc = png::Encoder::new(w, raster.width as u32, raster.height as u32);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            let png_err = |e: png::EncodingError| match e {
                png::EncodingError::IoError(io) => CliError::io(&path, io),
                other => CliError::Data(format!("{}: {other}", path.display())),
            };
            let mut writer = enc.write_header().map_err(png_err)?;
            writer.write_image_data(&raster.pixels).map_err(png_err)?;
            writer.finish().map_err(png_err)?;
        }
    }
    Ok(path)
}

/// Scatter plot of zeros in (time, log scale), small scales on top.
pub fn write_zero_svg(path: &Path, zeros: &[UHPPoint], t_range: (f64, f64), y_range: (f64, f64)) -> Result<()> {
    let (w, h) = (1200.0, 400.0);
    let (ly0, ly1) = (y_range.0.ln(), y_range.1.ln());
    let mut out = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .map_err(io)?;
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).map_err(io)?;
    for z in zeros {
        let x = w * (z.x - t_range.0) / (t_range.1 - t_range.0);
        let y = h * (z.y.ln() - ly0) / (ly1 - ly0);
        writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="0.8"/>"#).map_err(io)?;
    }
    writeln!(out, "</svg>").and_then(|_| out.flush()).map_err(io)
}
