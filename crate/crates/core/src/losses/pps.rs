use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, DepthMap, LightSpec, PpsTape};
use crate::grid::{Grid, Mask};
use crate::photometrics::ImageGray;
use crate::Real;

/// `(1/(H·W)) Σ M (pred − gt)²`. The normalization is by the full pixel
/// count, not by the number of valid pixels.
pub fn pps_sup_loss<T: Real>(pred: &Grid<T>, gt: &Grid<T>, mask: &Mask) -> Result<T> {
    pred.check_shape(gt)?;
    pred.check_shape(mask)?;
    if mask.count_valid() == 0 {
        return Err(Error::TooFewPixels { needed: 1, found: 0 });
    }
    let sum: T = pred
        .as_slice()
        .iter()
        .zip(gt.as_slice())
        .zip(mask.as_slice())
        .filter(|(_, &m)| m)
        .map(|((&p, &g), _)| (p - g) * (p - g))
        .sum();
    Ok(sum / T::from_usize_lossy(pred.len()))
}

/// Pearson correlation of two fields over the valid pixels, with the
/// centered sums needed for its derivative.
#[derive(Debug, Clone)]
pub(crate) struct Pearson<T> {
    pub rho: T,
    centered_a: Vec<T>,
    centered_b: Vec<T>,
    saa: T,
    sbb: T,
}

impl<T: Real> Pearson<T> {
    pub(crate) fn compute(a: &[T], b: &[T], mask: &[bool], a_name: &'static str, b_name: &'static str) -> Result<Self> {
        let n = mask.iter().filter(|&&m| m).count();
        if n < 2 {
            return Err(Error::TooFewPixels { needed: 2, found: n });
        }
        let nf = T::from_usize_lossy(n);
        let valid = || a.iter().zip(b).zip(mask).filter(|(_, &m)| m).map(|(p, _)| p);
        let mean_a = valid().map(|(&x, _)| x).sum::<T>() / nf;
        let mean_b = valid().map(|(_, &y)| y).sum::<T>() / nf;
        let centered_a: Vec<T> = a
            .iter()
            .zip(mask)
            .map(|(&x, &m)| if m { x - mean_a } else { T::zero() })
            .collect();
        let centered_b: Vec<T> = b
            .iter()
            .zip(mask)
            .map(|(&y, &m)| if m { y - mean_b } else { T::zero() })
            .collect();
        let saa: T = centered_a.iter().map(|&x| x * x).sum();
        let sbb: T = centered_b.iter().map(|&y| y * y).sum();
        let sab: T = centered_a.iter().zip(&centered_b).map(|(&x, &y)| x * y).sum();
        if !(saa > T::zero()) {
            return Err(Error::DegenerateCorrelation(a_name));
        }
        if !(sbb > T::zero()) {
            return Err(Error::DegenerateCorrelation(b_name));
        }
        Ok(Self {
            rho: sab / (saa * sbb).sqrt(),
            centered_a,
            centered_b,
            saa,
            sbb,
        })
    }

    /// `∂ρ/∂b_i`; zero on masked-out pixels.
    pub(crate) fn grad_b(&self) -> Vec<T> {
        let norm = (self.saa * self.sbb).sqrt();
        self.centered_a
            .iter()
            .zip(&self.centered_b)
            .map(|(&a, &b)| a / norm - self.rho * b / self.sbb)
            .collect()
    }
}

/// `1 − Pearson(I_g, PPS)` over the valid pixels only.
pub fn pps_corr_loss<T: Real>(gray: &ImageGray<T>, pps: &Grid<T>, mask: &Mask) -> Result<T> {
    gray.grid().check_shape(pps)?;
    gray.grid().check_shape(mask)?;
    let p = Pearson::compute(gray.grid().as_slice(), pps.as_slice(), mask.as_slice(), "image", "shading")?;
    Ok(T::one() - p.rho)
}

/// Supervised shading loss of the field rendered from `depth`, and its
/// gradient with respect to depth.
pub fn pps_sup_loss_with_grad<T: Real>(
    depth: &DepthMap<T>,
    k: &CameraIntrinsics<T>,
    light: &LightSpec<T>,
    pps_gt: &Grid<T>,
    mask: &Mask,
) -> Result<(T, Grid<T>)> {
    let tape = PpsTape::record(depth, k, light)?;
    let pred = tape.pps();
    let loss = pps_sup_loss(&pred, pps_gt, mask)?;
    let scale = T::two() / T::from_usize_lossy(pred.len());
    let grad_pps = Grid::from_fn(pred.width(), pred.height(), |u, v| {
        if *mask.get(u, v) {
            scale * (*pred.get(u, v) - *pps_gt.get(u, v))
        } else {
            T::zero()
        }
    });
    Ok((loss, tape.backward(&grad_pps)?))
}

/// Correlation loss of the field rendered from `depth`, and its gradient with
/// respect to depth. Pixels whose normal is undefined are dropped from the
/// mask.
pub fn pps_corr_loss_with_grad<T: Real>(
    depth: &DepthMap<T>,
    k: &CameraIntrinsics<T>,
    light: &LightSpec<T>,
    gray: &ImageGray<T>,
    mask: &Mask,
) -> Result<(T, Grid<T>)> {
    let tape = PpsTape::record(depth, k, light)?;
    let (loss, grad_pps) = corr_loss_and_pps_grad(&tape, gray, mask)?;
    Ok((loss, tape.backward(&grad_pps)?))
}

pub(crate) fn corr_loss_and_pps_grad<T: Real>(
    tape: &PpsTape<T>,
    gray: &ImageGray<T>,
    mask: &Mask,
) -> Result<(T, Grid<T>)> {
    let valid = mask.and(&tape.valid())?;
    gray.grid().check_shape(&valid)?;
    let p = Pearson::compute(gray.grid().as_slice(), tape.pps_slice(), valid.as_slice(), "image", "shading")?;
    let grad = p.grad_b().into_iter().map(|g| -g).collect();
    Ok((T::one() - p.rho, Grid::from_vec(tape.width(), tape.height(), grad)?))
}
