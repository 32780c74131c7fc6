use crate::error::{Error, Result};
use crate::grid::{Grid, Mask};
use crate::Real;

/// Least-squares scale and shift mapping `pred` onto `gt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleShift<T> {
    pub scale: T,
    pub shift: T,
}

impl<T: Real> ScaleShift<T> {
    pub fn apply(&self, x: T) -> T {
        self.scale * x + self.shift
    }
}

/// Minimizes `Σ_M (s·pred + t − gt)²` in closed form.
pub fn ssi_align<T: Real>(pred: &Grid<T>, gt: &Grid<T>, mask: &Mask) -> Result<ScaleShift<T>> {
    pred.check_shape(gt)?;
    pred.check_shape(mask)?;
    let pairs: Vec<(T, T)> = pred
        .as_slice()
        .iter()
        .zip(gt.as_slice())
        .zip(mask.as_slice())
        .filter(|(_, &m)| m)
        .map(|((&p, &g), _)| (p, g))
        .collect();
    if pairs.len() < 2 {
        return Err(Error::TooFewPixels {
            needed: 2,
            found: pairs.len(),
        });
    }
    let n = T::from_usize_lossy(pairs.len());
    let mean_p = pairs.iter().map(|&(p, _)| p).sum::<T>() / n;
    let mean_g = pairs.iter().map(|&(_, g)| g).sum::<T>() / n;
    let spp: T = pairs.iter().map(|&(p, _)| (p - mean_p) * (p - mean_p)).sum();
    let spg: T = pairs.iter().map(|&(p, g)| (p - mean_p) * (g - mean_g)).sum();
    let scale_ref = pairs.iter().map(|&(p, _)| p * p).sum::<T>();
    if !(spp > T::epsilon() * scale_ref) || !spp.is_finite() {
        return Err(Error::SingularAlignment);
    }
    let scale = spg / spp;
    Ok(ScaleShift {
        scale,
        shift: mean_g - scale * mean_p,
    })
}

/// Mean squared residual over valid pixels after [`ssi_align`].
pub fn ssi_loss<T: Real>(pred: &Grid<T>, gt: &Grid<T>, mask: &Mask) -> Result<T> {
    ssi_loss_with_grad(pred, gt, mask).map(|(l, _)| l)
}

/// Loss and its gradient with respect to `pred`. The alignment is optimal,
/// so its own derivative drops out: `∂L/∂p_i = 2 s r_i / n`.
pub fn ssi_loss_with_grad<T: Real>(pred: &Grid<T>, gt: &Grid<T>, mask: &Mask) -> Result<(T, Grid<T>)> {
    let st = ssi_align(pred, gt, mask)?;
    let n = T::from_usize_lossy(mask.count_valid());
    let residual = Grid::from_fn(pred.width(), pred.height(), |u, v| {
        if *mask.get(u, v) {
            st.apply(*pred.get(u, v)) - *gt.get(u, v)
        } else {
            T::zero()
        }
    });
    let loss = residual.as_slice().iter().map(|&r| r * r).sum::<T>() / n;
    let k = T::two() * st.scale / n;
    Ok((loss, residual.map(|&r| k * r)))
}
