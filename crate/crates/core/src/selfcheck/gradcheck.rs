//! Central finite-difference gradient checks.

use crate::error::Result;
use crate::grid::Grid;

/// Relative error below which a gradient entry is considered noise; the
/// denominator never drops under this fraction of the largest FD entry.
pub const RELATIVE_FLOOR: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub max_abs_fd: f64,
}

/// Compares `analytic` with central differences of `f` using the step
/// `rel_step · |x_i|` (or `rel_step` when `x_i = 0`).
pub fn check_gradient(
    x: &Grid<f64>,
    analytic: &Grid<f64>,
    rel_step: f64,
    mut f: impl FnMut(&Grid<f64>) -> Result<f64>,
) -> Result<GradCheck> {
    x.check_shape(analytic)?;
    let mut probe = x.clone();
    let mut fd = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let xi = x.as_slice()[i];
        let h = if xi == 0.0 { rel_step } else { rel_step * xi.abs() };
        probe.as_mut_slice()[i] = xi + h;
        let fp = f(&probe)?;
        probe.as_mut_slice()[i] = xi - h;
        let fm = f(&probe)?;
        probe.as_mut_slice()[i] = xi;
        fd.push((fp - fm) / (2.0 * h));
    }
    let max_abs_fd = fd.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let floor = (RELATIVE_FLOOR * max_abs_fd).max(f64::MIN_POSITIVE);
    let mut out = GradCheck {
        max_rel_error: 0.0,
        worst_index: 0,
        max_abs_fd,
    };
    for (i, (&a, &n)) in analytic.as_slice().iter().zip(&fd).enumerate() {
        let err = (a - n).abs() / n.abs().max(a.abs()).max(floor);
        if err > out.max_rel_error || err.is_nan() {
            out.max_rel_error = if err.is_nan() { f64::INFINITY } else { err };
            out.worst_index = i;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_exact() {
        let x = Grid::from_vec(2, 1, vec![1.5, -2.0]).unwrap();
        let g = x.map(|&v| 2.0 * v);
        let r = check_gradient(&x, &g, 1e-4, |p| Ok(p.as_slice().iter().map(|v| v * v).sum())).unwrap();
        assert!(r.max_rel_error < 1e-9);
    }

    #[test]
    fn wrong_gradient_detected() {
        let x = Grid::from_vec(1, 1, vec![1.0]).unwrap();
        let g = Grid::from_vec(1, 1, vec![3.0]).unwrap();
        let r = check_gradient(&x, &g, 1e-4, |p| Ok(p.as_slice()[0].powi(2))).unwrap();
        assert!(r.max_rel_error > 0.1);
    }
}
