//! Procedural test scenes with exact per-pixel ray intersections.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, DepthMap};
use crate::grid::Grid;
use crate::photometrics::AlbedoMap;
use crate::vec3::Vec3;
use crate::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceSpec {
    /// Plane through `(0, 0, distance)` with the given normal.
    Plane {
        distance: f64,
        #[serde(default = "default_axis")]
        normal: [f64; 3],
    },
    /// Sphere; the first visible intersection is used whether the camera is
    /// outside or inside it.
    SphereCap { center: [f64; 3], radius: f64 },
    /// Cylinder parallel to the optical axis, closed by a cap at `z = length`.
    /// `offset` shifts the cylinder axis in x/y; the camera must stay inside.
    Tube {
        radius: f64,
        length: f64,
        #[serde(default)]
        offset: [f64; 2],
    },
    /// Height field `z = distance + amplitude · sin(2πx/λ + φx) · sin(2πy/λ + φy)`.
    BumpField {
        distance: f64,
        amplitude: f64,
        wavelength: f64,
        #[serde(default)]
        phase: [f64; 2],
    },
}

fn default_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AlbedoSpec {
    Constant { rgb: [f64; 3] },
    /// `ρ_c = base_c · (1 + amplitude · sin(2π s/λ + 2c))` with
    /// `s = x + 1.3y + 0.7z`, clamped to `[0, 1]`.
    Pattern {
        base: [f64; 3],
        amplitude: f64,
        wavelength: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub surface: SurfaceSpec,
    pub albedo: AlbedoSpec,
}

/// Ground truth produced by [`generate_scene`].
#[derive(Debug, Clone)]
pub struct SyntheticScene<T> {
    pub depth: DepthMap<T>,
    pub albedo: AlbedoMap<T>,
    /// Analytic unit normals oriented away from the camera.
    pub normals: Grid<Vec3<T>>,
}

struct Hit<T> {
    t: T,
    normal: Vec3<T>,
}

impl SurfaceSpec {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            SurfaceSpec::Plane { distance, normal } => {
                if !(distance > 0.0) {
                    return bad(format!("plane distance must be positive, got {distance}"));
                }
                if normal.iter().map(|c| c * c).sum::<f64>() == 0.0 {
                    return bad("plane normal must be non-zero".into());
                }
            }
            SurfaceSpec::SphereCap { radius, .. } => {
                if !(radius > 0.0) {
                    return bad(format!("sphere radius must be positive, got {radius}"));
                }
            }
            SurfaceSpec::Tube { radius, length, offset } => {
                if !(radius > 0.0 && length > 0.0) {
                    return bad(format!("tube radius and length must be positive, got {radius}, {length}"));
                }
                if offset[0].hypot(offset[1]) >= radius {
                    return bad("camera must lie inside the tube".into());
                }
            }
            SurfaceSpec::BumpField {
                distance,
                amplitude,
                wavelength,
                ..
            } => {
                if !(wavelength > 0.0) {
                    return bad(format!("bump wavelength must be positive, got {wavelength}"));
                }
                if !(distance - amplitude.abs() > 0.0) {
                    return bad("bump field must stay in front of the camera".into());
                }
            }
        }
        Ok(())
    }

    fn intersect<T: Real>(&self, ray: Vec3<T>) -> Option<Hit<T>> {
        match *self {
            SurfaceSpec::Plane { distance, normal } => {
                let mut n = Vec3::new(T::lit(normal[0]), T::lit(normal[1]), T::lit(normal[2])).try_normalize()?;
                if n.z < T::zero() {
                    n = -n;
                }
                let denom = n.dot(ray);
                if denom <= T::zero() {
                    return None;
                }
                let t = n.z * T::lit(distance) / denom;
                (t > T::zero()).then_some(Hit { t, normal: n })
            }
            SurfaceSpec::SphereCap { center, radius } => {
                let c = Vec3::new(T::lit(center[0]), T::lit(center[1]), T::lit(center[2]));
                let r = T::lit(radius);
                let a = ray.norm_squared();
                let b = ray.dot(c);
                let cc = c.norm_squared() - r * r;
                let disc = b * b - a * cc;
                if disc < T::zero() {
                    return None;
                }
                let sq = disc.sqrt();
                let near = (b - sq) / a;
                let t = if near > T::zero() { near } else { (b + sq) / a };
                if !(t > T::zero()) {
                    return None;
                }
                let x = ray * t;
                let mut n = (x - c) / r;
                if n.dot(x) < T::zero() {
                    n = -n;
                }
                Some(Hit { t, normal: n })
            }
            SurfaceSpec::Tube { radius, length, offset } => {
                let (ox, oy) = (T::lit(offset[0]), T::lit(offset[1]));
                let r = T::lit(radius);
                let len = T::lit(length);
                let cap = Hit {
                    t: len,
                    normal: Vec3::new(T::zero(), T::zero(), T::one()),
                };
                let a = ray.x * ray.x + ray.y * ray.y;
                if a == T::zero() {
                    return Some(cap);
                }
                let b = ray.x * ox + ray.y * oy;
                let c = ox * ox + oy * oy - r * r;
                let t = (b + (b * b - a * c).sqrt()) / a;
                if t >= len {
                    return Some(cap);
                }
                let radial = Vec3::new(t * ray.x - ox, t * ray.y - oy, T::zero()) / r;
                Some(Hit { t, normal: radial })
            }
            SurfaceSpec::BumpField {
                distance,
                amplitude,
                wavelength,
                phase,
            } => {
                let (base, amp) = (T::lit(distance), T::lit(amplitude));
                let k = T::lit(2.0 * std::f64::consts::PI / wavelength);
                let (px, py) = (T::lit(phase[0]), T::lit(phase[1]));
                let height = |x: T, y: T| amp * (k * x + px).sin() * (k * y + py).sin();
                let g = |t: T| t - base - height(t * ray.x, t * ray.y);
                let lo0 = base - amp.abs();
                let hi0 = base + amp.abs();
                if amp == T::zero() {
                    return Some(Hit {
                        t: base,
                        normal: Vec3::new(T::zero(), T::zero(), T::one()),
                    });
                }
                // first sign change from the camera side, then bisection
                let steps = 256;
                let mut lo = lo0;
                let mut hi = hi0;
                let dt = (hi0 - lo0) / T::from_usize_lossy(steps);
                for i in 1..=steps {
                    let t = lo0 + dt * T::from_usize_lossy(i);
                    if g(t) >= T::zero() {
                        hi = t;
                        lo = t - dt;
                        break;
                    }
                }
                for _ in 0..200 {
                    let mid = (lo + hi) / T::two();
                    if mid == lo || mid == hi {
                        break;
                    }
                    if g(mid) >= T::zero() {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let t = (lo + hi) / T::two();
                let (x, y) = (t * ray.x, t * ray.y);
                let hx = amp * k * (k * x + px).cos() * (k * y + py).sin();
                let hy = amp * k * (k * x + px).sin() * (k * y + py).cos();
                let normal = Vec3::new(-hx, -hy, T::one()).try_normalize()?;
                Some(Hit { t, normal })
            }
        }
    }
}

impl AlbedoSpec {
    fn validate(&self) -> Result<()> {
        let in_unit = |c: &[f64; 3]| c.iter().all(|x| (0.0..=1.0).contains(x));
        match self {
            AlbedoSpec::Constant { rgb } if in_unit(rgb) => Ok(()),
            AlbedoSpec::Pattern { base, wavelength, .. } if in_unit(base) && *wavelength > 0.0 => Ok(()),
            _ => Err(Error::InvalidParameter(format!("invalid albedo spec {self:?}"))),
        }
    }

    fn at<T: Real>(&self, x: Vec3<T>) -> [T; 3] {
        match self {
            AlbedoSpec::Constant { rgb } => rgb.map(T::lit),
            AlbedoSpec::Pattern {
                base,
                amplitude,
                wavelength,
            } => {
                let s = (x.x + T::lit(1.3) * x.y + T::lit(0.7) * x.z) / T::lit(*wavelength);
                let tau = T::lit(2.0 * std::f64::consts::PI);
                let mut out = [T::zero(); 3];
                for (c, o) in out.iter_mut().enumerate() {
                    let wave = (tau * s + T::lit(2.0 * c as f64)).sin();
                    *o = (T::lit(base[c]) * (T::one() + T::lit(*amplitude) * wave))
                        .max(T::zero())
                        .min(T::one());
                }
                out
            }
        }
    }
}

/// Casts one ray per pixel and records depth, albedo and analytic normals.
pub fn generate_scene<T: Real>(spec: &SceneSpec, k: &CameraIntrinsics<T>) -> Result<SyntheticScene<T>> {
    k.validate()?;
    spec.surface.validate()?;
    spec.albedo.validate()?;
    let (w, h) = (k.width, k.height);
    let mut depth = Vec::with_capacity(w * h);
    let mut albedo = Vec::with_capacity(w * h);
    let mut normals = Vec::with_capacity(w * h);
    let mut uncovered = Vec::new();
    for v in 0..h {
        for u in 0..w {
            let ray = k.pixel_ray(u, v);
            match spec.surface.intersect(ray) {
                Some(hit) if hit.t > T::zero() && hit.t.is_finite() => {
                    let x = ray * hit.t;
                    depth.push(x.z);
                    albedo.push(spec.albedo.at(x));
                    normals.push(hit.normal);
                }
                _ => {
                    uncovered.push((u, v));
                    depth.push(T::one());
                    albedo.push([T::zero(); 3]);
                    normals.push(Vec3::zero());
                }
            }
        }
    }
    if !uncovered.is_empty() {
        return Err(Error::UncoveredPixels {
            count: uncovered.len(),
            first: uncovered.into_iter().take(5).collect(),
        });
    }
    Ok(SyntheticScene {
        depth: DepthMap::new(Grid::from_vec(w, h, depth)?)?,
        albedo: AlbedoMap::new(Grid::from_vec(w, h, albedo)?)?,
        normals: Grid::from_vec(w, h, normals)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam(w: usize, h: usize, f: f64) -> CameraIntrinsics<f64> {
        CameraIntrinsics::new(f, f, (w - 1) as f64 / 2.0, (h - 1) as f64 / 2.0, w, h).unwrap()
    }

    fn constant() -> AlbedoSpec {
        AlbedoSpec::Constant { rgb: [0.7, 0.5, 0.4] }
    }

    #[test]
    fn fronto_plane_is_constant() {
        let spec = SceneSpec {
            surface: SurfaceSpec::Plane {
                distance: 2.0,
                normal: [0.0, 0.0, 1.0],
            },
            albedo: constant(),
        };
        let s = generate_scene(&spec, &cam(8, 6, 10.0)).unwrap();
        assert!(s.depth.grid().as_slice().iter().all(|&d| (d - 2.0).abs() < 1e-15));
    }

    #[test]
    fn sphere_center_pixel_depth() {
        let spec = SceneSpec {
            surface: SurfaceSpec::SphereCap {
                center: [0.0, 0.0, 10.0],
                radius: 4.0,
            },
            albedo: constant(),
        };
        let s = generate_scene(&spec, &cam(9, 9, 40.0)).unwrap();
        assert!((s.depth.get(4, 4) - 6.0).abs() < 1e-12);
        assert!((*s.normals.get(4, 4) - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn tube_matches_bisection_oracle() {
        let spec = SceneSpec {
            surface: SurfaceSpec::Tube {
                radius: 3.0,
                length: 40.0,
                offset: [0.4, -0.2],
            },
            albedo: constant(),
        };
        let k = cam(16, 16, 12.0);
        let s = generate_scene(&spec, &k).unwrap();
        for (u, v, &d) in s.depth.grid().enumerate() {
            let r = k.pixel_ray(u, v);
            // inside-ness changes sign exactly once along the ray
            let outside = |t: f64| (t * r.x - 0.4).hypot(t * r.y + 0.2) - 3.0;
            if outside(40.0) < 0.0 {
                assert_eq!(d, 40.0);
                continue;
            }
            let (mut lo, mut hi) = (0.0, 40.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if outside(mid) < 0.0 {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            assert!((d - 0.5 * (lo + hi)).abs() < 1e-9, "({u},{v})");
        }
    }

    #[test]
    fn uncovered_frame_is_an_error() {
        let spec = SceneSpec {
            surface: SurfaceSpec::SphereCap {
                center: [0.0, 0.0, 10.0],
                radius: 1.0,
            },
            albedo: constant(),
        };
        let err = generate_scene(&spec, &cam(8, 8, 2.0)).unwrap_err();
        assert!(matches!(err, Error::UncoveredPixels { count, .. } if count > 0));
    }

    #[test]
    fn bump_field_lies_on_surface() {
        let spec = SceneSpec {
            surface: SurfaceSpec::BumpField {
                distance: 5.0,
                amplitude: 0.3,
                wavelength: 2.0,
                phase: [0.3, 0.1],
            },
            albedo: AlbedoSpec::Pattern {
                base: [0.8, 0.5, 0.4],
                amplitude: 0.1,
                wavelength: 3.0,
            },
        };
        let k = cam(12, 10, 10.0);
        let s = generate_scene(&spec, &k).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        for (u, v, &d) in s.depth.grid().enumerate() {
            let x = k.pixel_ray(u, v) * d;
            let z = 5.0 + 0.3 * (tau * x.x / 2.0 + 0.3).sin() * (tau * x.y / 2.0 + 0.1).sin();
            assert!((z - x.z).abs() < 1e-12);
        }
    }
}
