use crate::error::{Error, Result};
use crate::geometry::{backproject, normals_from_depth, CameraIntrinsics, DepthMap, NormalMap, PointMap};
use crate::grid::{Grid, Mask};
use crate::vec3::Vec3;
use crate::Real;

/// Distance below which a surface point is considered to touch the light.
pub const LIGHT_SURFACE_EPS: f64 = 1e-9;

/// Point light with position `p`, axis `d` and angular falloff exponent `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightSpec<T> {
    pub position: Vec3<T>,
    pub direction: Vec3<T>,
    pub mu: T,
}

impl<T: Real> LightSpec<T> {
    pub fn new(position: Vec3<T>, direction: Vec3<T>, mu: T) -> Result<Self> {
        let l = Self {
            position,
            direction,
            mu,
        };
        l.validate()?;
        Ok(l)
    }

    /// Isotropic light at the optical center looking down +z.
    pub fn colocated() -> Self {
        Self {
            position: Vec3::zero(),
            direction: Vec3::new(T::zero(), T::zero(), T::one()),
            mu: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() {
            return Err(Error::InvalidParameter("light position must be finite".into()));
        }
        let n = self.direction.norm().to_f64_lossy();
        if !((n - 1.0).abs() <= 1e-9) {
            return Err(Error::InvalidParameter(format!(
                "light direction must be unit length, got norm {n}"
            )));
        }
        if !(self.mu >= T::zero() && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be >= 0, got {}", self.mu)));
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> LightSpec<U> {
        LightSpec {
            position: self.position.cast(),
            direction: self.direction.cast(),
            mu: U::lit(self.mu.to_f64_lossy()),
        }
    }

    /// `(L·d)^μ / r²`, with the angular term dropped when `μ = 0` and
    /// clamped to zero when the point lies behind the light axis.
    #[inline]
    pub fn attenuation(&self, dir: Vec3<T>, dist: T) -> T {
        let inv_sq = T::one() / (dist * dist);
        if self.mu == T::zero() {
            return inv_sq;
        }
        let s = dir.dot(self.direction);
        if s <= T::zero() {
            T::zero()
        } else {
            s.powf(self.mu) * inv_sq
        }
    }
}

/// Per-pixel lighting: unit direction from the light to the surface and the
/// scalar attenuation.
#[derive(Debug, Clone, PartialEq)]
pub struct PerPixelLighting<T> {
    pub light_dirs: Grid<Vec3<T>>,
    pub attenuation: Grid<T>,
}

/// Lighting together with the shading it induces on the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct PpsField<T> {
    pub light_dirs: Grid<Vec3<T>>,
    pub attenuation: Grid<T>,
    pub pps: Grid<T>,
    pub normals: Grid<Vec3<T>>,
    /// False where the normal could not be estimated.
    pub valid: Mask,
}

pub fn compute_ppl<T: Real>(points: &PointMap<T>, light: &LightSpec<T>) -> Result<PerPixelLighting<T>> {
    let pts = points.points();
    let eps = T::lit(LIGHT_SURFACE_EPS);
    let mut dirs = Vec::with_capacity(pts.len());
    let mut att = Vec::with_capacity(pts.len());
    for (u, v, &x) in pts.enumerate() {
        let offset = x - light.position;
        let dist = offset.norm();
        if !(dist >= eps) {
            return Err(Error::LightOnSurface {
                u,
                v,
                distance: dist.to_f64_lossy(),
            });
        }
        let l = offset / dist;
        dirs.push(l);
        att.push(light.attenuation(l, dist));
    }
    let (w, h) = (pts.width(), pts.height());
    Ok(PerPixelLighting {
        light_dirs: Grid::from_vec(w, h, dirs)?,
        attenuation: Grid::from_vec(w, h, att)?,
    })
}

/// `PPS = A · max(0, L·N)`; pixels with an invalid normal get 0.
pub fn compute_pps<T: Real>(
    light_dirs: &Grid<Vec3<T>>,
    attenuation: &Grid<T>,
    normals: &NormalMap<T>,
) -> Result<Grid<T>> {
    light_dirs.check_shape(attenuation)?;
    light_dirs.check_shape(&normals.normals)?;
    let out = light_dirs
        .as_slice()
        .iter()
        .zip(attenuation.as_slice())
        .zip(normals.normals.as_slice().iter().zip(normals.valid.as_slice()))
        .map(|((&l, &a), (&n, &ok))| {
            if ok {
                a * l.dot(n).max(T::zero())
            } else {
                T::zero()
            }
        })
        .collect();
    Grid::from_vec(light_dirs.width(), light_dirs.height(), out)
}

/// Depth → points → normals → lighting → shading.
pub fn pps_from_depth<T: Real>(
    depth: &DepthMap<T>,
    k: &CameraIntrinsics<T>,
    light: &LightSpec<T>,
) -> Result<PpsField<T>> {
    let points = backproject(depth, k)?;
    let normals = normals_from_depth(&points)?;
    let ppl = compute_ppl(&points, light)?;
    let pps = compute_pps(&ppl.light_dirs, &ppl.attenuation, &normals)?;
    Ok(PpsField {
        light_dirs: ppl.light_dirs,
        attenuation: ppl.attenuation,
        pps,
        normals: normals.normals,
        valid: normals.valid,
    })
}
