//! Reproducible synthetic scenes shared by the self-check suite, the CLI
//! and the tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{pps_from_depth, CameraIntrinsics, DepthMap, LightSpec};
use crate::grid::Mask;
use crate::photometrics::{
    generate_scene, luminance, render, specular_mask, AlbedoSpec, ImageRgb, RenderModel, SceneSpec, SurfaceSpec,
    SPECULAR_THRESHOLD,
};
use crate::vec3::Vec3;

/// A rendered scene with everything needed to evaluate losses on it.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub k: CameraIntrinsics<f64>,
    pub light: LightSpec<f64>,
    pub model: RenderModel<f64>,
    pub depth: DepthMap<f64>,
    pub image: ImageRgb<f64>,
    /// Unsaturated pixels.
    pub mask: Mask,
}

fn centred_camera(w: usize, h: usize, f: f64) -> Result<CameraIntrinsics<f64>> {
    CameraIntrinsics::new(f, f, (w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0, w, h)
}

/// Renders `spec` with `σ₀` chosen so the brightest shading maps to
/// `peak` before albedo and display exponent.
pub fn render_fixture(
    spec: &SceneSpec,
    k: CameraIntrinsics<f64>,
    light: LightSpec<f64>,
    gamma: f64,
    peak: f64,
) -> Result<Fixture> {
    let scene = generate_scene::<f64>(spec, &k)?;
    let field = pps_from_depth(&scene.depth, &k, &light)?;
    let max_pps = field.pps.as_slice().iter().copied().fold(0.0, f64::max);
    let model = RenderModel::new(peak / max_pps, 1.0, gamma, 0.0)?;
    let out = render(&scene.depth, &k, &light, &scene.albedo, &model)?;
    let mask = specular_mask(&luminance(&out.image), SPECULAR_THRESHOLD)?;
    Ok(Fixture {
        k,
        light,
        model,
        depth: scene.depth,
        image: out.image,
        mask,
    })
}

/// The constant-albedo tube: 64×64, f = 40, colocated light, γ = 1.
pub fn tube_fixture() -> Result<Fixture> {
    let spec = SceneSpec {
        surface: SurfaceSpec::Tube {
            radius: 10.0,
            length: 60.0,
            offset: [2.0, -1.5],
        },
        albedo: AlbedoSpec::Constant {
            rgb: [0.8, 0.55, 0.45],
        },
    };
    render_fixture(&spec, centred_camera(64, 64, 40.0)?, LightSpec::colocated(), 1.0, 0.9 / 0.8)
}

/// Low-frequency multiplicative perturbation `d · (1 + amp · sin(2πu/W))`.
pub fn perturbed(depth: &DepthMap<f64>, amp: f64) -> Result<DepthMap<f64>> {
    let w = depth.width() as f64;
    DepthMap::from_fn(depth.width(), depth.height(), |u, v| {
        depth.get(u, v) * (1.0 + amp * (2.0 * std::f64::consts::PI * u as f64 / w).sin())
    })
}

/// Small textured bump field seen by an offset, directional light, plus
/// a jittered copy of its depth. Everything derives from `seed`.
pub struct SmallScene {
    pub fixture: Fixture,
    pub jittered: DepthMap<f64>,
}

pub fn small_scene(seed: u64, size: usize) -> Result<SmallScene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = SceneSpec {
        surface: SurfaceSpec::BumpField {
            distance: 2.0,
            amplitude: 0.05 + 0.05 * rng.gen::<f64>(),
            wavelength: 1.5 + rng.gen::<f64>(),
            phase: [rng.gen::<f64>() * 6.0, rng.gen::<f64>() * 6.0],
        },
        albedo: AlbedoSpec::Pattern {
            base: [0.7, 0.5, 0.4],
            amplitude: 0.3,
            wavelength: 0.7,
        },
    };
    let light = LightSpec::new(
        Vec3::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1), 0.0),
        Vec3::new(0.0, 0.0, 1.0),
        1.0,
    )?;
    let fixture = render_fixture(&spec, centred_camera(size, size, size as f64)?, light, 1.0, 0.9)?;
    // Alternating-sign jitter in log-depth: neighbouring differences stay
    // above 0.06 minus the bump slope, keeping the probe off the kinks of
    // the absolute-value smoothness term.
    let jittered = DepthMap::from_fn(size, size, |u, v| {
        let sign = if (u + v) % 2 == 0 { 1.0 } else { -1.0 };
        fixture.depth.get(u, v) * (sign * 0.03 * (1.0 + 0.5 * rng.gen::<f64>())).exp()
    })?;
    Ok(SmallScene { fixture, jittered })
}
