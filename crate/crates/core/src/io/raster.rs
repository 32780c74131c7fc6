//! 8/16-bit PNG (via `image`) and binary PPM/PGM, mapped to `[0, 1]`.
//!
//! PPM/PGM: `P6`/`P5`, width, height, maxval, one whitespace byte, then
//! samples (one byte each for maxval < 256, else two bytes big-endian).

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::photometrics::{ImageGray, ImageRgb};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    fn max(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

fn quantize<T: Real>(x: T, depth: BitDepth) -> u16 {
    (x.to_f64_lossy().clamp(0.0, 1.0) * depth.max()).round() as u16
}

fn image_err(e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::Format(other.to_string()),
    }
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Reads PNG, PPM or PGM; grayscale inputs are replicated to three channels.
pub fn read_rgb<T: Real>(path: impl AsRef<Path>) -> Result<ImageRgb<T>> {
    let path = path.as_ref();
    let (grid, _) = match extension(path).as_str() {
        "ppm" | "pgm" | "pnm" => decode_pnm(&std::fs::read(path)?)?,
        _ => decode_png(path)?,
    };
    ImageRgb::new(grid.map(|px| px.map(|c| T::lit(c))))
}

/// Reads an image, taking luminance only if the channels differ.
pub fn read_gray<T: Real>(path: impl AsRef<Path>) -> Result<ImageGray<T>> {
    let rgb = read_rgb::<T>(path)?;
    if rgb.grid().as_slice().iter().all(|p| p[0] == p[1] && p[1] == p[2]) {
        ImageGray::new(rgb.grid().map(|p| p[0]))
    } else {
        Ok(crate::photometrics::luminance(&rgb))
    }
}

fn decode_png(path: &Path) -> Result<(Grid<[f64; 3]>, BitDepth)> {
    let img = image::ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(image_err)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (px, depth): (Vec<[f64; 3]>, BitDepth) = match img {
        DynamicImage::ImageLuma8(b) => (b.pixels().map(|p| [f64::from(p[0]) / 255.0; 3]).collect(), BitDepth::Eight),
        DynamicImage::ImageLumaA8(b) => (b.pixels().map(|p| [f64::from(p[0]) / 255.0; 3]).collect(), BitDepth::Eight),
        DynamicImage::ImageRgb8(b) => (b.pixels().map(|p| p.0.map(|c| f64::from(c) / 255.0)).collect(), BitDepth::Eight),
        DynamicImage::ImageRgba8(b) => (
            b.pixels().map(|p| [p[0], p[1], p[2]].map(|c| f64::from(c) / 255.0)).collect(),
            BitDepth::Eight,
        ),
        DynamicImage::ImageLuma16(b) => (b.pixels().map(|p| [f64::from(p[0]) / 65535.0; 3]).collect(), BitDepth::Sixteen),
        DynamicImage::ImageLumaA16(b) => (b.pixels().map(|p| [f64::from(p[0]) / 65535.0; 3]).collect(), BitDepth::Sixteen),
        DynamicImage::ImageRgb16(b) => (b.pixels().map(|p| p.0.map(|c| f64::from(c) / 65535.0)).collect(), BitDepth::Sixteen),
        DynamicImage::ImageRgba16(b) => (
            b.pixels().map(|p| [p[0], p[1], p[2]].map(|c| f64::from(c) / 65535.0)).collect(),
            BitDepth::Sixteen,
        ),
        other => return Err(Error::UnsupportedBitDepth(format!("{:?}", other.color()))),
    };
    Ok((Grid::from_vec(w, h, px)?, depth))
}

pub fn write_rgb<T: Real>(path: impl AsRef<Path>, image: &ImageRgb<T>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let grid = image.grid().map(|px| px.map(|c| quantize(c, depth)));
    match extension(path).as_str() {
        "ppm" | "pnm" => std::fs::write(path, encode_pnm(&grid, 3, depth))?,
        "png" => {
            let (w, h) = (grid.width() as u32, grid.height() as u32);
            let flat: Vec<u16> = grid.as_slice().iter().flatten().copied().collect();
            let img = match depth {
                BitDepth::Eight => DynamicImage::ImageRgb8(
                    ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, flat.iter().map(|&c| c as u8).collect())
                        .expect("buffer sized from grid"),
                ),
                BitDepth::Sixteen => DynamicImage::ImageRgb16(
                    ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, flat).expect("buffer sized from grid"),
                ),
            };
            img.save(path).map_err(image_err)?;
        }
        other => return Err(Error::Format(format!("cannot write colour image as '.{other}'"))),
    }
    Ok(())
}

pub fn write_gray<T: Real>(path: impl AsRef<Path>, image: &ImageGray<T>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let grid = image.grid().map(|&c| quantize(c, depth));
    match extension(path).as_str() {
        "pgm" | "pnm" => std::fs::write(path, encode_pnm(&grid.map(|&c| [c; 3]), 1, depth))?,
        "png" => {
            let (w, h) = (grid.width() as u32, grid.height() as u32);
            let flat = grid.into_vec();
            let img = match depth {
                BitDepth::Eight => DynamicImage::ImageLuma8(
                    ImageBuffer::<Luma<u8>, _>::from_raw(w, h, flat.iter().map(|&c| c as u8).collect())
                        .expect("buffer sized from grid"),
                ),
                BitDepth::Sixteen => DynamicImage::ImageLuma16(
                    ImageBuffer::<Luma<u16>, _>::from_raw(w, h, flat).expect("buffer sized from grid"),
                ),
            };
            img.save(path).map_err(image_err)?;
        }
        other => return Err(Error::Format(format!("cannot write gray image as '.{other}'"))),
    }
    Ok(())
}

fn encode_pnm(grid: &Grid<[u16; 3]>, channels: usize, depth: BitDepth) -> Vec<u8> {
    let magic = if channels == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n{}\n", grid.width(), grid.height(), depth.max()).into_bytes();
    for px in grid.as_slice() {
        for &c in &px[..channels] {
            match depth {
                BitDepth::Eight => out.push(c as u8),
                BitDepth::Sixteen => out.extend_from_slice(&c.to_be_bytes()),
            }
        }
    }
    out
}

/// Binary PPM (P6) or PGM (P5); PGM is replicated to three channels.
pub fn decode_pnm(bytes: &[u8]) -> Result<(Grid<[f64; 3]>, BitDepth)> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PNM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    let channels = match fields[0].as_str() {
        "P6" => 3,
        "P5" => 1,
        other => return Err(Error::Format(format!("unsupported PNM magic '{other}'"))),
    };
    let num = |s: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Format(format!("bad PNM header field '{s}'")))
    };
    let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval > 65535 {
        return Err(Error::UnsupportedBitDepth(format!("maxval {maxval}")));
    }
    if pos >= bytes.len() {
        return Err(Error::Format("truncated PNM header".into()));
    }
    pos += 1;
    let bps = if maxval < 256 { 1 } else { 2 };
    let body = &bytes[pos..];
    let need = w * h * channels * bps;
    if body.len() < need {
        return Err(Error::Format(format!("PNM body holds {} bytes, expected {need}", body.len())));
    }
    let sample = |i: usize| -> f64 {
        let raw = if bps == 1 {
            u16::from(body[i])
        } else {
            u16::from_be_bytes([body[2 * i], body[2 * i + 1]])
        };
        f64::from(raw.min(maxval as u16)) / maxval as f64
    };
    let px = (0..w * h)
        .map(|p| {
            if channels == 3 {
                [sample(3 * p), sample(3 * p + 1), sample(3 * p + 2)]
            } else {
                [sample(p); 3]
            }
        })
        .collect();
    let depth = if bps == 1 { BitDepth::Eight } else { BitDepth::Sixteen };
    Ok((Grid::from_vec(w, h, px)?, depth))
}
