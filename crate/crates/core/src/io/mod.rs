//! File formats and configuration.

mod colormap;
mod config;
mod pfm;
mod ply;
mod raster;

pub use colormap::{colormap, false_color};
pub use config::{CameraSection, LightSection, MaskSection, PathsSection, PipelineConfig, RenderSection};
pub use pfm::{decode_pfm, encode_pfm, read_depth, read_pfm, to_f32, write_depth, write_pfm, Endian};
pub use ply::{export_pointcloud, PlyFormat, PointCloud};
pub use raster::{decode_pnm, read_gray, read_rgb, write_gray, write_rgb, BitDepth};
