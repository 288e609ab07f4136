//! Grayscale PNG reading and writing with fixed encodings:
//! masks and contours are 8-bit, probability maps are written as 16-bit
//! `round(p * 65535)` and read from either 8- or 16-bit files.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use png::{BitDepth, ColorType};

use super::{ContourMap, GrayImage, ProbMap, SegMask};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_SIDE: u32 = 16384;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PngLimits {
    /// Largest accepted width or height.
    pub max_side: u32,
}

impl Default for PngLimits {
    fn default() -> Self {
        Self {
            max_side: DEFAULT_MAX_SIDE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterKind {
    Mask,
    Contour,
    Prob,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedRaster<S> {
    Mask(SegMask),
    Contour(ContourMap),
    Prob(ProbMap<S>),
}

struct Decoded {
    width: u32,
    height: u32,
    color: ColorType,
    depth: BitDepth,
    data: Vec<u8>,
}

fn png_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Png {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn decode(path: &Path, limits: PngLimits) -> Result<Decoded> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new_with_limits(
        BufReader::new(file),
        png::Limits { bytes: usize::MAX },
    );
    decoder.set_transformations(png::Transformations::IDENTITY);
    let info = decoder.read_header_info().map_err(|e| png_err(path, e))?;
    let (width, height) = (info.width, info.height);
    if width > limits.max_side || height > limits.max_side {
        return Err(Error::Size {
            width,
            height,
            limit: limits.max_side,
        });
    }
    let mut reader = decoder.read_info().map_err(|e| png_err(path, e))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| png_err(path, "image too large for this platform"))?;
    let mut data = vec![0; size];
    let out = reader.next_frame(&mut data).map_err(|e| png_err(path, e))?;
    data.truncate(out.buffer_size());
    Ok(Decoded {
        width,
        height,
        color: out.color_type,
        depth: out.bit_depth,
        data,
    })
}

fn format_err(path: &Path, d: &Decoded, wanted: &str) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: format!(
            "expected {wanted}, found {:?} at {:?}",
            d.color, d.depth
        ),
    }
}

fn gray8(path: &Path, limits: PngLimits) -> Result<Decoded> {
    let d = decode(path, limits)?;
    if d.color != ColorType::Grayscale || d.depth != BitDepth::Eight {
        return Err(format_err(path, &d, "8-bit single-channel grayscale"));
    }
    Ok(d)
}

/// Reads an 8-bit grayscale mask; labels are the raw pixel values.
pub fn load_mask(path: impl AsRef<Path>, ignore_index: Option<u8>) -> Result<SegMask> {
    let path = path.as_ref();
    let d = gray8(path, PngLimits::default())?;
    SegMask::new(d.width, d.height, d.data, ignore_index)
}

/// Reads an 8-bit grayscale contour map; any nonzero pixel is contour.
pub fn load_contour(path: impl AsRef<Path>) -> Result<ContourMap> {
    load_contour_limited(path.as_ref(), PngLimits::default())
}

fn load_contour_limited(path: &Path, limits: PngLimits) -> Result<ContourMap> {
    let d = gray8(path, limits)?;
    let bits = d.data.iter().map(|&v| v != 0).collect();
    ContourMap::new(d.width, d.height, bits)
}

/// Reads an 8- or 16-bit single-channel probability map, scaling by the
/// maximum code value of the bit depth.
pub fn load_prob<S: Scalar>(path: impl AsRef<Path>) -> Result<ProbMap<S>> {
    load_prob_limited(path.as_ref(), PngLimits::default())
}

fn load_prob_limited<S: Scalar>(path: &Path, limits: PngLimits) -> Result<ProbMap<S>> {
    let d = decode(path, limits)?;
    if d.color != ColorType::Grayscale {
        return Err(format_err(path, &d, "a single-channel probability map"));
    }
    let probs: Vec<S> = match d.depth {
        BitDepth::Eight => {
            let scale = S::from_count(255);
            d.data.iter().map(|&v| S::from_count(v as u64) / scale).collect()
        }
        BitDepth::Sixteen => {
            let scale = S::from_count(65535);
            d.data
                .chunks_exact(2)
                .map(|b| S::from_count(u16::from_be_bytes([b[0], b[1]]) as u64) / scale)
                .collect()
        }
        _ => return Err(format_err(path, &d, "8- or 16-bit samples")),
    };
    ProbMap::new(d.width, d.height, probs)
}

/// Reads a grayscale, gray+alpha, RGB or RGBA image of 8 or 16 bits into
/// luma values in `[0, 1]` (Rec. 601 weights; alpha ignored).
pub fn load_gray<S: Scalar>(path: impl AsRef<Path>) -> Result<GrayImage<S>> {
    let path = path.as_ref();
    let d = decode(path, PngLimits::default())?;
    let samples: Vec<f64> = match d.depth {
        BitDepth::Eight => d.data.iter().map(|&v| v as f64 / 255.0).collect(),
        BitDepth::Sixteen => d
            .data
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64 / 65535.0)
            .collect(),
        _ => return Err(format_err(path, &d, "8- or 16-bit samples")),
    };
    let pixels: Vec<S> = match d.color {
        ColorType::Grayscale => samples.into_iter().map(S::from_f64_lossy).collect(),
        ColorType::GrayscaleAlpha => samples.chunks_exact(2).map(|p| S::from_f64_lossy(p[0])).collect(),
        ColorType::Rgb | ColorType::Rgba => {
            let stride = if d.color == ColorType::Rgb { 3 } else { 4 };
            samples
                .chunks_exact(stride)
                .map(|p| S::from_f64_lossy(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]))
                .collect()
        }
        ColorType::Indexed => return Err(format_err(path, &d, "a non-palette image")),
    };
    GrayImage::new(d.width, d.height, pixels)
}

pub fn load_png<S: Scalar>(path: impl AsRef<Path>, kind: RasterKind) -> Result<LoadedRaster<S>> {
    load_png_with_limits(path, kind, PngLimits::default())
}

pub fn load_png_with_limits<S: Scalar>(
    path: impl AsRef<Path>,
    kind: RasterKind,
    limits: PngLimits,
) -> Result<LoadedRaster<S>> {
    let path = path.as_ref();
    Ok(match kind {
        RasterKind::Mask => {
            let d = gray8(path, limits)?;
            LoadedRaster::Mask(SegMask::new(d.width, d.height, d.data, None)?)
        }
        RasterKind::Contour => LoadedRaster::Contour(load_contour_limited(path, limits)?),
        RasterKind::Prob => LoadedRaster::Prob(load_prob_limited(path, limits)?),
    })
}

fn write_gray(path: &Path, width: u32, height: u32, depth: BitDepth, data: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width, height);
    encoder.set_color(ColorType::Grayscale);
    encoder.set_depth(depth);
    let mut writer = encoder.write_header().map_err(|e| png_err(path, e))?;
    writer.write_image_data(data).map_err(|e| png_err(path, e))?;
    writer.finish().map_err(|e| png_err(path, e))
}

/// Writes contour pixels as 255 and background as 0 (8-bit).
pub fn save_contour(c: &ContourMap, path: impl AsRef<Path>) -> Result<()> {
    let data: Vec<u8> = c.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_gray(path.as_ref(), c.width(), c.height(), BitDepth::Eight, &data)
}

/// Writes `round(p * 65535)` as 16-bit samples.
pub fn save_prob<S: Scalar>(p: &ProbMap<S>, path: impl AsRef<Path>) -> Result<()> {
    let mut data = Vec::with_capacity(p.probs().len() * 2);
    for v in p.probs() {
        let code = (v.to_f64().unwrap_or(0.0) * 65535.0).round() as u16;
        data.extend_from_slice(&code.to_be_bytes());
    }
    write_gray(path.as_ref(), p.width(), p.height(), BitDepth::Sixteen, &data)
}

pub fn save_mask(m: &SegMask, path: impl AsRef<Path>) -> Result<()> {
    write_gray(path.as_ref(), m.width(), m.height(), BitDepth::Eight, m.labels())
}

/// Writes `round(v * 255)` of values clamped to `[0, 1]` (8-bit).
pub fn save_gray<S: Scalar>(img: &GrayImage<S>, path: impl AsRef<Path>) -> Result<()> {
    let data: Vec<u8> = img
        .pixels()
        .iter()
        .map(|v| (v.to_f64().unwrap_or(0.0).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    write_gray(path.as_ref(), img.width(), img.height(), BitDepth::Eight, &data)
}
