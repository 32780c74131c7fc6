//! Point clouds as PLY, ASCII or binary little-endian.
//!
//! ```text
//! ply
//! format binary_little_endian 1.0
//! element vertex <n>
//! property float x
//! property float y
//! property float z
//! property uchar red      (only with colour)
//! property uchar green
//! property uchar blue
//! end_header
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{backproject, CameraIntrinsics, DepthMap};
use crate::grid::Mask;
use crate::photometrics::ImageRgb;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub vertices: Vec<[f32; 3]>,
    pub colors: Option<Vec<[u8; 3]>>,
}

impl PointCloud {
    /// One vertex per masked pixel, in raster order.
    pub fn from_depth<T: Real>(
        depth: &DepthMap<T>,
        k: &CameraIntrinsics<T>,
        mask: &Mask,
        color: Option<&ImageRgb<T>>,
    ) -> Result<Self> {
        depth.grid().check_shape(mask)?;
        if let Some(c) = color {
            depth.grid().check_shape(c.grid())?;
        }
        let points = backproject(depth, k)?;
        let mut vertices = Vec::new();
        let mut colors = color.map(|_| Vec::new());
        for (u, v, &keep) in mask.enumerate() {
            if !keep {
                continue;
            }
            let p = points.get(u, v);
            vertices.push([p.x, p.y, p.z].map(|c| c.to_f32().unwrap_or(f32::NAN)));
            if let (Some(out), Some(img)) = (colors.as_mut(), color) {
                out.push(img.get(u, v).map(|c| (c.to_f64_lossy().clamp(0.0, 1.0) * 255.0).round() as u8));
            }
        }
        if vertices.is_empty() {
            return Err(Error::TooFewPixels { needed: 1, found: 0 });
        }
        Ok(Self { vertices, colors })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn encode(&self, format: PlyFormat) -> Vec<u8> {
        let fmt = match format {
            PlyFormat::Ascii => "ascii",
            PlyFormat::BinaryLittleEndian => "binary_little_endian",
        };
        let mut header = format!("ply\nformat {fmt} 1.0\nelement vertex {}\n", self.len());
        header.push_str("property float x\nproperty float y\nproperty float z\n");
        if self.colors.is_some() {
            header.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
        }
        header.push_str("end_header\n");
        let mut out = header.into_bytes();
        match format {
            PlyFormat::Ascii => {
                let mut body = String::new();
                for (i, p) in self.vertices.iter().enumerate() {
                    let _ = write!(body, "{} {} {}", p[0], p[1], p[2]);
                    if let Some(c) = &self.colors {
                        let _ = write!(body, " {} {} {}", c[i][0], c[i][1], c[i][2]);
                    }
                    body.push('\n');
                }
                out.extend_from_slice(body.as_bytes());
            }
            PlyFormat::BinaryLittleEndian => {
                for (i, p) in self.vertices.iter().enumerate() {
                    for c in p {
                        out.extend_from_slice(&c.to_le_bytes());
                    }
                    if let Some(c) = &self.colors {
                        out.extend_from_slice(&c[i]);
                    }
                }
            }
        }
        out
    }

    /// Reads files in the layout written by [`PointCloud::encode`].
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        const END: &[u8] = b"end_header\n";
        let end = bytes
            .windows(END.len())
            .position(|w| w == END)
            .ok_or_else(|| Error::Format("PLY header has no end_header".into()))?;
        let header = std::str::from_utf8(&bytes[..end]).map_err(|_| Error::Format("PLY header is not UTF-8".into()))?;
        let body = &bytes[end + END.len()..];
        let mut lines = header.lines();
        if lines.next() != Some("ply") {
            return Err(Error::Format("missing 'ply' magic".into()));
        }
        let mut format = None;
        let mut count = None;
        let mut props = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["format", "ascii", _] => format = Some(PlyFormat::Ascii),
                ["format", "binary_little_endian", _] => format = Some(PlyFormat::BinaryLittleEndian),
                ["format", other, _] => return Err(Error::Format(format!("unsupported PLY format '{other}'"))),
                ["element", "vertex", n] => {
                    count = Some(n.parse::<usize>().map_err(|_| Error::Format(format!("bad vertex count '{n}'")))?)
                }
                ["element", other, ..] => return Err(Error::Format(format!("unsupported PLY element '{other}'"))),
                ["property", ty, name] => props.push((ty.to_string(), name.to_string())),
                ["comment", ..] | [] => {}
                _ => return Err(Error::Format(format!("unrecognized PLY header line '{line}'"))),
            }
        }
        let format = format.ok_or_else(|| Error::Format("PLY header has no format".into()))?;
        let count = count.ok_or_else(|| Error::Format("PLY header has no vertex element".into()))?;
        let names: Vec<(&str, &str)> = props.iter().map(|(t, n)| (t.as_str(), n.as_str())).collect();
        let xyz = [("float", "x"), ("float", "y"), ("float", "z")];
        let rgb = [("uchar", "red"), ("uchar", "green"), ("uchar", "blue")];
        let has_color = if names == xyz {
            false
        } else if names.len() == 6 && names[..3] == xyz && names[3..] == rgb {
            true
        } else {
            return Err(Error::Format(format!("unsupported vertex properties {names:?}")));
        };

        let mut vertices = Vec::with_capacity(count);
        let mut colors = has_color.then(|| Vec::with_capacity(count));
        match format {
            PlyFormat::BinaryLittleEndian => {
                let stride = 12 + if has_color { 3 } else { 0 };
                if body.len() != stride * count {
                    return Err(Error::Format(format!(
                        "PLY body holds {} bytes, expected {}",
                        body.len(),
                        stride * count
                    )));
                }
                for rec in body.chunks_exact(stride) {
                    let f = |i: usize| f32::from_le_bytes([rec[4 * i], rec[4 * i + 1], rec[4 * i + 2], rec[4 * i + 3]]);
                    vertices.push([f(0), f(1), f(2)]);
                    if let Some(c) = colors.as_mut() {
                        c.push([rec[12], rec[13], rec[14]]);
                    }
                }
            }
            PlyFormat::Ascii => {
                let text = std::str::from_utf8(body).map_err(|_| Error::Format("PLY body is not UTF-8".into()))?;
                let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
                if rows.len() != count {
                    return Err(Error::Format(format!("PLY has {} vertex rows, expected {count}", rows.len())));
                }
                for row in rows {
                    let vals: Vec<&str> = row.split_whitespace().collect();
                    if vals.len() != props.len() {
                        return Err(Error::Format(format!("malformed PLY vertex row '{row}'")));
                    }
                    let bad = || Error::Format(format!("malformed PLY vertex row '{row}'"));
                    let mut p = [0.0f32; 3];
                    for (d, s) in p.iter_mut().zip(&vals[..3]) {
                        *d = s.parse().map_err(|_| bad())?;
                    }
                    vertices.push(p);
                    if let Some(c) = colors.as_mut() {
                        let mut px = [0u8; 3];
                        for (d, s) in px.iter_mut().zip(&vals[3..]) {
                            *d = s.parse().map_err(|_| bad())?;
                        }
                        c.push(px);
                    }
                }
            }
        }
        Ok(Self { vertices, colors })
    }

    pub fn write(&self, path: impl AsRef<Path>, format: PlyFormat) -> Result<()> {
        std::fs::write(path, self.encode(format))?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }
}

/// Backprojects the masked pixels and writes them to `path`.
pub fn export_pointcloud<T: Real>(
    depth: &DepthMap<T>,
    k: &CameraIntrinsics<T>,
    mask: &Mask,
    color: Option<&ImageRgb<T>>,
    path: impl AsRef<Path>,
    format: PlyFormat,
) -> Result<PointCloud> {
    let cloud = PointCloud::from_depth(depth, k, mask, color)?;
    cloud.write(path, format)?;
    Ok(cloud)
}
