//! Point-light Lambertian image formation and its per-pixel inversion.
//!
//! Per pixel and channel the renderer evaluates
//!
//! ```text
//! I = clamp01( (σ₀ / ‖X − p‖² · R(ψ) · cos θ · ρ · g)^(1/γ) )
//! ```
//!
//! with `cos θ = max(0, L·N)` and `R(ψ) = (L·d)^μ_r`.

use crate::error::{Error, Result};
use crate::geometry::{backproject, pps_from_depth, CameraIntrinsics, DepthMap, LightSpec, PpsField};
use crate::grid::{Grid, Mask};
use crate::photometrics::{AlbedoMap, ImageRgb};
use crate::vec3::Vec3;
use crate::Real;

/// Smallest `R(ψ)·cos θ` for which the albedo is recovered.
pub const INVERSION_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderModel<T> {
    /// Source radiant intensity σ₀.
    pub sigma0: T,
    /// Camera gain g.
    pub gain: T,
    /// Display exponent γ.
    pub gamma: T,
    /// Exponent of the angular spread `R(ψ) = (L·d)^μ_r`.
    pub mu_r: T,
}

impl<T: Real> Default for RenderModel<T> {
    fn default() -> Self {
        Self {
            sigma0: T::one(),
            gain: T::one(),
            gamma: T::one(),
            mu_r: T::zero(),
        }
    }
}

impl<T: Real> RenderModel<T> {
    pub fn new(sigma0: T, gain: T, gamma: T, mu_r: T) -> Result<Self> {
        let m = Self {
            sigma0,
            gain,
            gamma,
            mu_r,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: T| x > T::zero() && x.is_finite();
        if !(positive(self.sigma0) && positive(self.gain) && positive(self.gamma)) {
            return Err(Error::InvalidParameter(format!(
                "render model needs sigma0, gain, gamma > 0 (got {}, {}, {})",
                self.sigma0, self.gain, self.gamma
            )));
        }
        if !(self.mu_r >= T::zero() && self.mu_r.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu_r must be >= 0, got {}", self.mu_r)));
        }
        Ok(())
    }

    /// Angular spread `R(ψ)`.
    #[inline]
    pub fn spread(&self, dir: Vec3<T>, axis: Vec3<T>) -> T {
        if self.mu_r == T::zero() {
            return T::one();
        }
        let s = dir.dot(axis);
        if s <= T::zero() {
            T::zero()
        } else {
            s.powf(self.mu_r)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RenderOutput<T> {
    pub image: ImageRgb<T>,
    /// True where at least one channel was clipped at 1.
    pub clamped: Mask,
    /// Shading field of the input depth, including the normal validity mask.
    pub field: PpsField<T>,
}

struct PixelTerms<T> {
    dist: T,
    spread: T,
    cos_theta: T,
}

fn pixel_terms<T: Real>(
    depth: &DepthMap<T>,
    k: &CameraIntrinsics<T>,
    light: &LightSpec<T>,
    model: &RenderModel<T>,
) -> Result<(Vec<PixelTerms<T>>, PpsField<T>)> {
    let points = backproject(depth, k)?;
    let field = pps_from_depth(depth, k, light)?;
    let terms = points
        .points()
        .enumerate()
        .map(|(u, v, &x)| {
            let l = *field.light_dirs.get(u, v);
            let cos_theta = if *field.valid.get(u, v) {
                l.dot(*field.normals.get(u, v)).max(T::zero())
            } else {
                T::zero()
            };
            PixelTerms {
                dist: (x - light.position).norm(),
                spread: model.spread(l, light.direction),
                cos_theta,
            }
        })
        .collect();
    Ok((terms, field))
}

pub fn render<T: Real>(
    depth: &DepthMap<T>,
    k: &CameraIntrinsics<T>,
    light: &LightSpec<T>,
    albedo: &AlbedoMap<T>,
    model: &RenderModel<T>,
) -> Result<RenderOutput<T>> {
    model.validate()?;
    depth.grid().check_shape(albedo.grid())?;
    let (terms, field) = pixel_terms(depth, k, light, model)?;
    let inv_gamma = T::one() / model.gamma;
    let mut clamped = Mask::filled(depth.width(), depth.height(), false);
    let pixels = Grid::from_fn(depth.width(), depth.height(), |u, v| {
        let t = &terms[v * depth.width() + u];
        let radiance = model.sigma0 / (t.dist * t.dist) * t.spread * t.cos_theta * model.gain;
        albedo.get(u, v).map(|rho| {
            let i = (radiance * rho).powf(inv_gamma);
            if i > T::one() {
                *clamped.get_mut(u, v) = true;
                T::one()
            } else {
                i.max(T::zero())
            }
        })
    });
    Ok(RenderOutput {
        image: ImageRgb::new(pixels)?,
        clamped,
        field,
    })
}

#[derive(Debug, Clone)]
pub struct AlbedoInversion<T> {
    pub albedo: AlbedoMap<T>,
    /// Pixels where `R·cos θ` clears the guard, the normal is defined and no
    /// channel is saturated. Invalid pixels hold zero albedo.
    pub valid: Mask,
}

/// `ρ = ‖X − p‖² · I^γ / (R(ψ) · cos θ)` per channel with σ₀ = g = 1.
pub fn invert_albedo<T: Real>(
    image: &ImageRgb<T>,
    depth: &DepthMap<T>,
    k: &CameraIntrinsics<T>,
    light: &LightSpec<T>,
    model: &RenderModel<T>,
) -> Result<AlbedoInversion<T>> {
    model.validate()?;
    depth.grid().check_shape(image.grid())?;
    let (terms, _) = pixel_terms(depth, k, light, model)?;
    let guard = T::lit(INVERSION_GUARD);
    let mut valid = Mask::full(depth.width(), depth.height());
    let values = Grid::from_fn(depth.width(), depth.height(), |u, v| {
        let t = &terms[v * depth.width() + u];
        let px = image.get(u, v);
        let denom = t.spread * t.cos_theta;
        if denom < guard || px.iter().any(|&c| c >= T::one()) {
            *valid.get_mut(u, v) = false;
            return [T::zero(); 3];
        }
        px.map(|i| t.dist * t.dist * i.powf(model.gamma) / denom)
    });
    Ok(AlbedoInversion {
        albedo: AlbedoMap::from_grid_unchecked(values),
        valid,
    })
}

/// Mean of the per-channel population variances over valid pixels.
pub fn albedo_variance_loss<T: Real>(albedo: &AlbedoMap<T>, mask: &Mask) -> Result<T> {
    albedo.grid().check_shape(mask)?;
    let samples: Vec<[T; 3]> = albedo
        .grid()
        .as_slice()
        .iter()
        .zip(mask.as_slice())
        .filter(|(_, &m)| m)
        .map(|(&p, _)| p)
        .collect();
    if samples.len() < 2 {
        return Err(Error::TooFewPixels {
            needed: 2,
            found: samples.len(),
        });
    }
    let n = T::from_usize_lossy(samples.len());
    let mut total = T::zero();
    for c in 0..3 {
        let mean = samples.iter().map(|p| p[c]).sum::<T>() / n;
        let var = samples.iter().map(|p| (p[c] - mean) * (p[c] - mean)).sum::<T>() / n;
        total = total + var;
    }
    Ok(total / T::lit(3.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(w: usize, h: usize, z: f64) -> (DepthMap<f64>, CameraIntrinsics<f64>) {
        let k = CameraIntrinsics::new(10.0, 10.0, (w / 2) as f64, (h / 2) as f64, w, h).unwrap();
        (DepthMap::constant(w, h, z).unwrap(), k)
    }

    #[test]
    fn degenerates_to_pps_on_axis() {
        let (d, k) = plane(5, 5, 2.0);
        let light = LightSpec::colocated();
        let albedo = AlbedoMap::constant(5, 5, [1.0; 3]).unwrap();
        let out = render(&d, &k, &light, &albedo, &RenderModel::default()).unwrap();
        assert!((out.image.get(2, 2)[0] - 0.25).abs() < 1e-15);
        let model = RenderModel::new(1.0, 1.0, 2.0, 0.0).unwrap();
        let out = render(&d, &k, &light, &albedo, &model).unwrap();
        assert!((out.image.get(2, 2)[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn saturation_is_reported() {
        let (d, k) = plane(4, 4, 0.5);
        let albedo = AlbedoMap::constant(4, 4, [1.0; 3]).unwrap();
        let out = render(&d, &k, &LightSpec::colocated(), &albedo, &RenderModel::default()).unwrap();
        assert_eq!(out.clamped.count_valid(), 16);
        assert!(out.image.grid().as_slice().iter().all(|p| p[0] == 1.0));
    }

    #[test]
    fn round_trip_constant_albedo() {
        let (d, k) = plane(6, 6, 2.0);
        let light = LightSpec::colocated();
        let rho = [0.8, 0.4, 0.4];
        let albedo = AlbedoMap::constant(6, 6, rho).unwrap();
        let model = RenderModel::default();
        let out = render(&d, &k, &light, &albedo, &model).unwrap();
        let inv = invert_albedo(&out.image, &d, &k, &light, &model).unwrap();
        assert_eq!(inv.valid.count_valid(), 36);
        for (_, _, px) in inv.albedo.grid().enumerate() {
            for c in 0..3 {
                assert!((px[c] - rho[c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_intensity_gives_zero_albedo() {
        let (d, k) = plane(3, 3, 2.0);
        let img = ImageRgb::new(Grid::filled(3, 3, [0.0; 3])).unwrap();
        let inv = invert_albedo(&img, &d, &k, &LightSpec::colocated(), &RenderModel::default()).unwrap();
        assert!(inv.albedo.grid().as_slice().iter().all(|p| *p == [0.0; 3]));
        assert_eq!(inv.valid.count_valid(), 9);
    }

    #[test]
    fn grazing_pixels_are_invalid() {
        let (d, k) = plane(3, 3, 2.0);
        let light = LightSpec::new(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0), 0.0).unwrap();
        let img = ImageRgb::new(Grid::filled(3, 3, [0.5; 3])).unwrap();
        // light axis pointing sideways: R(ψ) = 0 everywhere
        let side = LightSpec::new(Vec3::zero(), Vec3::new(1.0, 0.0, 0.0), 0.0).unwrap();
        let model = RenderModel::new(1.0, 1.0, 1.0, 2.0).unwrap();
        let inv = invert_albedo(&img, &d, &k, &side, &model).unwrap();
        assert!(inv.valid.count_valid() < 9);
        let inv = invert_albedo(&img, &d, &k, &light, &RenderModel::default()).unwrap();
        assert_eq!(inv.valid.count_valid(), 9);
    }

    #[test]
    fn variance_examples() {
        let m = Mask::full(2, 1);
        let c = AlbedoMap::constant(2, 1, [0.3, 0.6, 0.9]).unwrap();
        assert_eq!(albedo_variance_loss(&c, &m).unwrap(), 0.0);
        let a = AlbedoMap::new(Grid::from_vec(2, 1, vec![[0.0f64, 0.5, 0.5], [1.0, 0.5, 0.5]]).unwrap()).unwrap();
        assert!((albedo_variance_loss(&a, &m).unwrap() - 0.25 / 3.0).abs() < 1e-15);
        let one = Grid::from_vec(2, 1, vec![true, false]).unwrap();
        assert!(matches!(
            albedo_variance_loss(&a, &one),
            Err(Error::TooFewPixels { needed: 2, found: 1 })
        ));
        let dup = AlbedoMap::new(Grid::from_vec(3, 1, vec![[0.2; 3], [0.9; 3], [0.2; 3]]).unwrap()).unwrap();
        let keep = Grid::from_vec(3, 1, vec![true, false, true]).unwrap();
        assert_eq!(albedo_variance_loss(&dup, &keep).unwrap(), 0.0);
    }
}
