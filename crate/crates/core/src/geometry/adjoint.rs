//! Reverse-mode derivative of the depth → shading chain.
//!
//! [`PpsTape::record`] evaluates the same forward chain as
//! [`pps_from_depth`](crate::geometry::pps_from_depth) while keeping every
//! intermediate; [`PpsTape::backward`] then pulls a gradient on the shading
//! field back onto the depth map.

use crate::error::{Error, Result};
use crate::geometry::normals::{degenerate_cross, stencil, tangents};
use crate::geometry::{CameraIntrinsics, DepthMap, LightSpec, LIGHT_SURFACE_EPS};
use crate::grid::{Grid, Mask};
use crate::vec3::Vec3;
use crate::Real;

#[derive(Debug, Clone)]
pub struct PpsTape<T> {
    width: usize,
    height: usize,
    light: LightSpec<T>,
    rays: Vec<Vec3<T>>,
    du: Vec<Vec3<T>>,
    dv: Vec<Vec3<T>>,
    cross_norm: Vec<T>,
    normals: Vec<Vec3<T>>,
    valid: Vec<bool>,
    dirs: Vec<Vec3<T>>,
    dist: Vec<T>,
    att: Vec<T>,
    pps: Vec<T>,
}

impl<T: Real> PpsTape<T> {
    pub fn record(depth: &DepthMap<T>, k: &CameraIntrinsics<T>, light: &LightSpec<T>) -> Result<Self> {
        let (w, h) = (depth.width(), depth.height());
        if w != k.width || h != k.height {
            return Err(Error::DimensionMismatch {
                expected_w: k.width,
                expected_h: k.height,
                got_w: w,
                got_h: h,
            });
        }
        if w < 2 || h < 2 {
            return Err(Error::InvalidParameter(format!(
                "shading needs at least 2x2 pixels, got {w}x{h}"
            )));
        }
        let rays: Vec<Vec3<T>> = (0..h)
            .flat_map(|v| (0..w).map(move |u| (u, v)))
            .map(|(u, v)| k.pixel_ray(u, v))
            .collect();
        let points = Grid::from_vec(
            w,
            h,
            rays.iter().zip(depth.grid().as_slice()).map(|(&r, &d)| r * d).collect(),
        )?;
        let n = w * h;
        let mut tape = Self {
            width: w,
            height: h,
            light: *light,
            rays,
            du: Vec::with_capacity(n),
            dv: Vec::with_capacity(n),
            cross_norm: Vec::with_capacity(n),
            normals: Vec::with_capacity(n),
            valid: Vec::with_capacity(n),
            dirs: Vec::with_capacity(n),
            dist: Vec::with_capacity(n),
            att: Vec::with_capacity(n),
            pps: Vec::with_capacity(n),
        };
        let eps = T::lit(LIGHT_SURFACE_EPS);
        for v in 0..h {
            for u in 0..w {
                let x = *points.get(u, v);
                let (du, dv) = tangents(&points, u, v);
                let m = du.cross(dv);
                let ok = !degenerate_cross(m, du, dv);
                let mn = m.norm();
                let normal = if ok { m / mn } else { Vec3::zero() };
                let offset = x - light.position;
                let r = offset.norm();
                if !(r >= eps) {
                    return Err(Error::LightOnSurface {
                        u,
                        v,
                        distance: r.to_f64_lossy(),
                    });
                }
                let l = offset / r;
                let a = light.attenuation(l, r);
                let shade = if ok { a * l.dot(normal).max(T::zero()) } else { T::zero() };
                tape.du.push(du);
                tape.dv.push(dv);
                tape.cross_norm.push(mn);
                tape.normals.push(normal);
                tape.valid.push(ok);
                tape.dirs.push(l);
                tape.dist.push(r);
                tape.att.push(a);
                tape.pps.push(shade);
            }
        }
        Ok(tape)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pps(&self) -> Grid<T> {
        Grid::from_vec(self.width, self.height, self.pps.clone()).expect("tape shape")
    }

    pub fn pps_slice(&self) -> &[T] {
        &self.pps
    }

    pub fn valid(&self) -> Mask {
        Grid::from_vec(self.width, self.height, self.valid.clone()).expect("tape shape")
    }

    /// Gradient with respect to depth given `∂f/∂PPS`.
    pub fn backward(&self, grad_pps: &Grid<T>) -> Result<Grid<T>> {
        if grad_pps.width() != self.width || grad_pps.height() != self.height {
            return Err(Error::DimensionMismatch {
                expected_w: self.width,
                expected_h: self.height,
                got_w: grad_pps.width(),
                got_h: grad_pps.height(),
            });
        }
        let (w, h) = (self.width, self.height);
        let mut grad_x = vec![Vec3::<T>::zero(); w * h];
        let two = T::two();
        for v in 0..h {
            for u in 0..w {
                let i = v * w + u;
                let g = *grad_pps.get(u, v);
                if g == T::zero() || !self.valid[i] {
                    continue;
                }
                let l = self.dirs[i];
                let n = self.normals[i];
                let c = l.dot(n);
                if c <= T::zero() {
                    continue;
                }
                let a = self.att[i];
                let r = self.dist[i];
                let grad_att = g * c;
                let grad_c = g * a;
                let mut grad_l = n * grad_c;
                let grad_n = l * grad_c;

                let mut grad_r = T::zero();
                if self.light.mu == T::zero() {
                    grad_r = -grad_att * two / (r * r * r);
                } else {
                    let s = l.dot(self.light.direction);
                    if s > T::zero() {
                        let mu = self.light.mu;
                        let grad_s = grad_att * mu * s.powf(mu - T::one()) / (r * r);
                        grad_r = -grad_att * two * a / r;
                        grad_l += self.light.direction * grad_s;
                    }
                }
                // L = (X - p) / r, r = |X - p|
                grad_x[i] += (grad_l - l * l.dot(grad_l)) / r + l * grad_r;

                // N = m / |m|, m = du × dv
                let grad_m = (grad_n - n * n.dot(grad_n)) / self.cross_norm[i];
                let grad_du = self.dv[i].cross(grad_m);
                let grad_dv = grad_m.cross(self.du[i]);
                let (up, um, wu) = stencil::<T>(u, w);
                grad_x[v * w + up] += grad_du * wu;
                grad_x[v * w + um] += -(grad_du * wu);
                let (vp, vm, wv) = stencil::<T>(v, h);
                grad_x[vp * w + u] += grad_dv * wv;
                grad_x[vm * w + u] += -(grad_dv * wv);
            }
        }
        let grad_depth = grad_x
            .iter()
            .zip(&self.rays)
            .map(|(&gx, &ray)| gx.dot(ray))
            .collect();
        Grid::from_vec(w, h, grad_depth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pps_from_depth;

    fn bumpy_depth() -> DepthMap<f64> {
        DepthMap::from_fn(7, 6, |u, v| {
            3.0 + 0.3 * (u as f64 * 0.7).sin() + 0.2 * (v as f64 * 1.1).cos() + 0.05 * (u * v) as f64
        })
        .unwrap()
    }

    #[test]
    fn forward_matches_composed_pipeline() {
        let k = CameraIntrinsics::new(5.0, 6.0, 3.0, 2.5, 7, 6).unwrap();
        let light = LightSpec::new(Vec3::new(0.1, -0.2, 0.0), Vec3::new(0.0, 0.0, 1.0), 1.5).unwrap();
        let d = bumpy_depth();
        let tape = PpsTape::record(&d, &k, &light).unwrap();
        let field = pps_from_depth(&d, &k, &light).unwrap();
        for (a, b) in tape.pps().as_slice().iter().zip(field.pps.as_slice()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let k = CameraIntrinsics::new(5.0, 6.0, 3.0, 2.5, 7, 6).unwrap();
        for light in [
            LightSpec::colocated(),
            LightSpec::new(Vec3::new(0.1, -0.2, 0.0), Vec3::new(0.0, 0.6, 0.8), 1.5).unwrap(),
        ] {
            let d = bumpy_depth();
            // f = Σ w_i PPS_i with fixed weights
            let weights = Grid::from_fn(7, 6, |u, v| ((u * 3 + v * 5) % 7) as f64 - 3.0);
            let f = |d: &DepthMap<f64>| -> f64 {
                let t = PpsTape::record(d, &k, &light).unwrap();
                t.pps_slice().iter().zip(weights.as_slice()).map(|(p, w)| p * w).sum()
            };
            let tape = PpsTape::record(&d, &k, &light).unwrap();
            let grad = tape.backward(&weights).unwrap();
            for (u, v, &g) in grad.enumerate() {
                let h = 1e-6 * d.get(u, v);
                let mut plus = d.grid().clone();
                *plus.get_mut(u, v) += h;
                let mut minus = d.grid().clone();
                *minus.get_mut(u, v) -= h;
                let fd = (f(&DepthMap::new(plus).unwrap()) - f(&DepthMap::new(minus).unwrap())) / (2.0 * h);
                assert!((fd - g).abs() <= 1e-6 * fd.abs().max(1e-3), "({u},{v}) fd={fd} an={g}");
            }
        }
    }
}
