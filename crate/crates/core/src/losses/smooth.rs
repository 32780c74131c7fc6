use crate::error::Result;
use crate::geometry::DepthMap;
use crate::grid::Grid;
use crate::photometrics::ImageGray;
use crate::Real;

/// Depth regularizer expressed on log-depth.
pub trait DepthRegularizer<T: Real> {
    fn value(&self, log_depth: &Grid<T>, gray: &ImageGray<T>) -> Result<T> {
        self.value_and_grad(log_depth, gray).map(|(v, _)| v)
    }

    /// Value and gradient with respect to log-depth.
    fn value_and_grad(&self, log_depth: &Grid<T>, gray: &ImageGray<T>) -> Result<(T, Grid<T>)>;
}

/// First-order edge-aware smoothness on log-depth:
/// `Σ |Δ log d| · exp(−|Δ I|)` over forward differences along u and v,
/// divided by the pixel count. Each pixel owns the differences to its right
/// and lower neighbours; the last column/row own none in that direction.
#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeAwareSmoothness;

impl<T: Real> DepthRegularizer<T> for EdgeAwareSmoothness {
    fn value_and_grad(&self, log_depth: &Grid<T>, gray: &ImageGray<T>) -> Result<(T, Grid<T>)> {
        log_depth.check_shape(gray.grid())?;
        let (w, h) = (log_depth.width(), log_depth.height());
        let inv_n = T::one() / T::from_usize_lossy(w * h);
        let mut total = T::zero();
        let mut grad = Grid::filled(w, h, T::zero());
        let mut edge = |a: (usize, usize), b: (usize, usize), grad: &mut Grid<T>| {
            let dz = *log_depth.get(b.0, b.1) - *log_depth.get(a.0, a.1);
            let weight = (-(gray.get(b.0, b.1) - gray.get(a.0, a.1)).abs()).exp();
            total = total + dz.abs() * weight;
            let g = sign(dz) * weight * inv_n;
            *grad.get_mut(b.0, b.1) = *grad.get(b.0, b.1) + g;
            *grad.get_mut(a.0, a.1) = *grad.get(a.0, a.1) - g;
        };
        for v in 0..h {
            for u in 0..w {
                if u + 1 < w {
                    edge((u, v), (u + 1, v), &mut grad);
                }
                if v + 1 < h {
                    edge((u, v), (u, v + 1), &mut grad);
                }
            }
        }
        Ok((total * inv_n, grad))
    }
}

fn sign<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

pub fn log_depth<T: Real>(depth: &DepthMap<T>) -> Grid<T> {
    depth.grid().map(|d| d.ln())
}

/// Edge-aware smoothness of a depth map.
pub fn smoothness_reg<T: Real>(depth: &DepthMap<T>, gray: &ImageGray<T>) -> Result<T> {
    EdgeAwareSmoothness.value(&log_depth(depth), gray)
}

/// Smoothness and its gradient with respect to depth (not log-depth).
pub fn smoothness_reg_with_grad<T: Real>(depth: &DepthMap<T>, gray: &ImageGray<T>) -> Result<(T, Grid<T>)> {
    let (value, grad_log) = EdgeAwareSmoothness.value_and_grad(&log_depth(depth), gray)?;
    let grad = Grid::from_fn(depth.width(), depth.height(), |u, v| *grad_log.get(u, v) / depth.get(u, v));
    Ok((value, grad))
}
