//! Portable float map.
//!
//! ```text
//! Pf\n            (PF\n for three channels)
//! <width> <height>\n
//! <scale>\n       negative = little-endian, positive = big-endian
//! f32 samples, rows stored bottom to top
//! ```
//!
//! A 1×1 little-endian map holding 1.0 is the 15 bytes
//! `50 66 0a 31 20 31 0a 2d 31 0a 00 00 80 3f`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::DepthMap;
use crate::grid::Grid;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endian {
    Little,
    Big,
}

/// Single-channel float map, top row first in memory.
pub fn decode_pfm(bytes: &[u8]) -> Result<Grid<f32>> {
    let mut pos = 0;
    let token = |pos: &mut usize| -> Result<String> {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::Format("truncated PFM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    match token(&mut pos)?.as_str() {
        "Pf" => {}
        "PF" => return Err(Error::Format("three-channel PFM where a single channel was expected".into())),
        other => return Err(Error::Format(format!("bad PFM magic '{other}'"))),
    }
    let parse_dim = |s: String| {
        s.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Format(format!("bad PFM dimension '{s}'")))
    };
    let width = parse_dim(token(&mut pos)?)?;
    let height = parse_dim(token(&mut pos)?)?;
    let scale_tok = token(&mut pos)?;
    let scale: f64 = scale_tok
        .parse()
        .ok()
        .filter(|s: &f64| s.is_finite() && *s != 0.0)
        .ok_or_else(|| Error::Format(format!("bad PFM scale '{scale_tok}'")))?;
    let endian = if scale < 0.0 { Endian::Little } else { Endian::Big };
    // exactly one whitespace byte separates the header from the data
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Format("truncated PFM header".into()));
    }
    pos += 1;

    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("PFM dimensions overflow".into()))?;
    let body = &bytes[pos..];
    if body.len() != n * 4 {
        return Err(Error::Format(format!(
            "PFM body holds {} bytes, expected {} for {width}x{height}",
            body.len(),
            n * 4
        )));
    }
    let mut data = vec![0.0f32; n];
    for (i, chunk) in body.chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let x = match endian {
            Endian::Little => f32::from_le_bytes(b),
            Endian::Big => f32::from_be_bytes(b),
        };
        let (u, row_from_bottom) = (i % width, i / width);
        let v = height - 1 - row_from_bottom;
        if x.is_nan() {
            return Err(Error::NanValue { u, v });
        }
        data[v * width + u] = x;
    }
    Grid::from_vec(width, height, data)
}

pub fn encode_pfm(grid: &Grid<f32>, endian: Endian) -> Vec<u8> {
    let (w, h) = (grid.width(), grid.height());
    let scale = match endian {
        Endian::Little => "-1",
        Endian::Big => "1",
    };
    let mut out = format!("Pf\n{w} {h}\n{scale}\n").into_bytes();
    out.reserve(w * h * 4);
    for v in (0..h).rev() {
        for u in 0..w {
            let x = *grid.get(u, v);
            out.extend_from_slice(&match endian {
                Endian::Little => x.to_le_bytes(),
                Endian::Big => x.to_be_bytes(),
            });
        }
    }
    out
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<Grid<f32>> {
    decode_pfm(&std::fs::read(path)?)
}

pub fn write_pfm(path: impl AsRef<Path>, grid: &Grid<f32>) -> Result<()> {
    std::fs::write(path, encode_pfm(grid, Endian::Little))?;
    Ok(())
}

pub fn read_depth<T: Real>(path: impl AsRef<Path>) -> Result<DepthMap<T>> {
    DepthMap::new(read_pfm(path)?.map(|&x| T::lit(f64::from(x))))
}

/// Stores the depth as 32-bit floats.
pub fn write_depth<T: Real>(path: impl AsRef<Path>, depth: &DepthMap<T>) -> Result<()> {
    write_pfm(path, &to_f32(depth.grid()))
}

pub fn to_f32<T: Real>(grid: &Grid<T>) -> Grid<f32> {
    grid.map(|x| x.to_f32().unwrap_or(f32::NAN))
}
