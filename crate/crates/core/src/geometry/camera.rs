use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::vec3::Vec3;
use crate::Real;

/// Pinhole intrinsics without skew or distortion.
///
/// Pixel `(u, v)` is the integer column/row index; no half-pixel offset is
/// applied, so the principal point is expressed in the same integer frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: usize,
    pub height: usize,
}

impl<T: Real> CameraIntrinsics<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T, width: usize, height: usize) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > T::zero() && self.fy > T::zero() && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err(Error::InvalidParameter("principal point must be finite".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image size must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    /// `K⁻¹ (u, v, 1)ᵀ`, the viewing ray through a pixel with unit z.
    #[inline]
    pub fn ray(&self, u: T, v: T) -> Vec3<T> {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, T::one())
    }

    #[inline]
    pub fn pixel_ray(&self, u: usize, v: usize) -> Vec3<T> {
        self.ray(T::from_usize_lossy(u), T::from_usize_lossy(v))
    }

    pub fn cast<U: Real>(&self) -> CameraIntrinsics<U> {
        CameraIntrinsics {
            fx: U::lit(self.fx.to_f64_lossy()),
            fy: U::lit(self.fy.to_f64_lossy()),
            cx: U::lit(self.cx.to_f64_lossy()),
            cy: U::lit(self.cy.to_f64_lossy()),
            width: self.width,
            height: self.height,
        }
    }

    fn check_dims<V>(&self, grid: &Grid<V>) -> Result<()> {
        if grid.width() != self.width || grid.height() != self.height {
            return Err(Error::DimensionMismatch {
                expected_w: self.width,
                expected_h: self.height,
                got_w: grid.width(),
                got_h: grid.height(),
            });
        }
        Ok(())
    }
}

/// Depth along the optical axis (the z coordinate), strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap<T>(Grid<T>);

impl<T: Real> DepthMap<T> {
    pub fn new(values: Grid<T>) -> Result<Self> {
        for (u, v, &d) in values.enumerate() {
            if !(d > T::zero() && d.is_finite()) {
                return Err(Error::InvalidDepth {
                    u,
                    v,
                    value: d.to_f64_lossy(),
                });
            }
        }
        Ok(Self(values))
    }

    pub fn from_fn(width: usize, height: usize, f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        Self::new(Grid::from_fn(width, height, f))
    }

    pub fn constant(width: usize, height: usize, value: T) -> Result<Self> {
        Self::new(Grid::filled(width, height, value))
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.0
    }

    pub fn into_grid(self) -> Grid<T> {
        self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> T {
        *self.0.get(u, v)
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.0.map(|&d| d * c))
    }
}

/// Camera-frame surface points, one per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMap<T>(pub Grid<Vec3<T>>);

impl<T: Real> PointMap<T> {
    pub fn points(&self) -> &Grid<Vec3<T>> {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Vec3<T> {
        *self.0.get(u, v)
    }
}

/// `X(u,v) = D(u,v) · K⁻¹ (u, v, 1)ᵀ`.
pub fn backproject<T: Real>(depth: &DepthMap<T>, k: &CameraIntrinsics<T>) -> Result<PointMap<T>> {
    k.check_dims(depth.grid())?;
    let grid = Grid::from_fn(depth.width(), depth.height(), |u, v| {
        k.pixel_ray(u, v) * depth.get(u, v)
    });
    Ok(PointMap(grid))
}

/// Pixel coordinates of a camera-frame point.
pub fn project<T: Real>(point: Vec3<T>, k: &CameraIntrinsics<T>) -> Result<(T, T)> {
    if !(point.z > T::zero()) {
        return Err(Error::BehindCamera {
            u: 0,
            v: 0,
            z: point.z.to_f64_lossy(),
        });
    }
    Ok((
        k.fx * point.x / point.z + k.cx,
        k.fy * point.y / point.z + k.cy,
    ))
}
