use crate::error::{Error, Result};
use crate::geometry::PointMap;
use crate::grid::{Grid, Mask};
use crate::vec3::Vec3;
use crate::Real;

/// Unit surface normals oriented away from the camera, plus a validity mask
/// for pixels where the tangent cross product degenerates.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMap<T> {
    pub normals: Grid<Vec3<T>>,
    pub valid: Mask,
}

impl<T: Real> NormalMap<T> {
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Vec3<T> {
        *self.normals.get(u, v)
    }

    pub fn width(&self) -> usize {
        self.normals.width()
    }

    pub fn height(&self) -> usize {
        self.normals.height()
    }
}

/// Finite-difference stencil along one axis of length `n`: central in the
/// interior, one-sided on the border. Returns `(plus, minus, weight)`.
#[inline]
pub(crate) fn stencil<T: Real>(i: usize, n: usize) -> (usize, usize, T) {
    if i == 0 {
        (1, 0, T::one())
    } else if i == n - 1 {
        (n - 1, n - 2, T::one())
    } else {
        (i + 1, i - 1, T::lit(0.5))
    }
}

/// Tangents `∂X/∂u` and `∂X/∂v` at a pixel.
#[inline]
pub(crate) fn tangents<T: Real>(points: &Grid<Vec3<T>>, u: usize, v: usize) -> (Vec3<T>, Vec3<T>) {
    let (up, um, wu) = stencil::<T>(u, points.width());
    let (vp, vm, wv) = stencil::<T>(v, points.height());
    let du = (*points.get(up, v) - *points.get(um, v)) * wu;
    let dv = (*points.get(u, vp) - *points.get(u, vm)) * wv;
    (du, dv)
}

/// Relative threshold below which `|∂X/∂u × ∂X/∂v|` counts as degenerate.
pub(crate) fn degenerate_cross<T: Real>(m: Vec3<T>, du: Vec3<T>, dv: Vec3<T>) -> bool {
    let mn = m.norm();
    !(mn.is_finite() && mn > T::lit(1e-12) * du.norm() * dv.norm() && mn > T::zero())
}

/// `N = (∂X/∂u × ∂X/∂v) / ‖∂X/∂u × ∂X/∂v‖`.
///
/// With `v` growing downward in the image and `fx, fy > 0`, the cross product
/// of a visible surface points away from the camera, so a fronto-parallel
/// plane yields `(0, 0, 1)`.
pub fn normals_from_depth<T: Real>(points: &PointMap<T>) -> Result<NormalMap<T>> {
    let (w, h) = (points.width(), points.height());
    if w < 2 || h < 2 {
        return Err(Error::InvalidParameter(format!(
            "normal estimation needs at least 2x2 points, got {w}x{h}"
        )));
    }
    let pts = points.points();
    let mut valid = Mask::full(w, h);
    let normals = Grid::from_fn(w, h, |u, v| {
        let (du, dv) = tangents(pts, u, v);
        let m = du.cross(dv);
        if degenerate_cross(m, du, dv) {
            *valid.get_mut(u, v) = false;
            Vec3::zero()
        } else {
            m / m.norm()
        }
    });
    Ok(NormalMap { normals, valid })
}
