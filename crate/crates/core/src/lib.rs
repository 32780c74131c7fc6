//! Near-field point-light photometrics for monocular depth: per-pixel
//! lighting and shading from depth, photometric and scale-invariant
//! losses, a physically based renderer with albedo inversion, depth
//! metrics, a gradient-based depth refiner and a forward-only toy
//! refinement network.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for common use.

pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod losses;
pub mod photometrics;
pub mod ppsnet;
pub mod refine;
pub mod scalar;
pub mod selfcheck;
pub mod vec3;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DepthMap64 = geometry::DepthMap<f64>;
pub type DepthMap32 = geometry::DepthMap<f32>;
pub type Camera64 = geometry::CameraIntrinsics<f64>;
pub type Camera32 = geometry::CameraIntrinsics<f32>;
pub type Light64 = geometry::LightSpec<f64>;
pub type Light32 = geometry::LightSpec<f32>;
pub type ImageRgb64 = photometrics::ImageRgb<f64>;
pub type ImageRgb32 = photometrics::ImageRgb<f32>;
pub type ImageGray64 = photometrics::ImageGray<f64>;
pub type ImageGray32 = photometrics::ImageGray<f32>;
pub type RefineResult64 = refine::RefineResult<f64>;
