//! Image-side models: masks, albedo proxy, rendering and synthetic scenes.

mod color;
mod image;
mod render;
mod scene;

pub use color::{albedo_proxy, hsv_to_rgb, rgb_to_hsv, AlbedoMap};
pub use image::{luminance, specular_mask, ImageGray, ImageRgb, LUMA_WEIGHTS, SPECULAR_THRESHOLD};
pub use render::{
    albedo_variance_loss, invert_albedo, render, AlbedoInversion, RenderModel, RenderOutput, INVERSION_GUARD,
};
pub use scene::{generate_scene, AlbedoSpec, SceneSpec, SurfaceSpec, SyntheticScene};
