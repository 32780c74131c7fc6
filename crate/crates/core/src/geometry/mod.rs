//! Pinhole camera geometry and per-pixel lighting/shading fields.

mod adjoint;
mod camera;
mod lighting;
mod normals;

pub use adjoint::PpsTape;
pub use camera::{backproject, project, CameraIntrinsics, DepthMap, PointMap};
pub use lighting::{
    compute_ppl, compute_pps, pps_from_depth, LightSpec, PerPixelLighting, PpsField, LIGHT_SURFACE_EPS,
};
pub use normals::{normals_from_depth, NormalMap};
