use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, DepthMap, LightSpec, PpsTape};
use crate::grid::{Grid, Mask};
use crate::losses::{corr_loss_and_pps_grad, DepthRegularizer, EdgeAwareSmoothness};
use crate::photometrics::{luminance, ImageGray, ImageRgb};
use crate::Real;

/// Term weights of the refinement objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights<T> {
    pub corr: T,
    pub smooth: T,
    /// Weight of the optional L2 pull towards a reference depth.
    pub reference: T,
}

impl<T: Real> ObjectiveWeights<T> {
    pub fn new(corr: T, smooth: T) -> Self {
        Self {
            corr,
            smooth,
            reference: T::zero(),
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, w) in [("corr", self.corr), ("smooth", self.smooth), ("reference", self.reference)] {
            if !(w >= T::zero() && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("objective weight {name} must be >= 0, got {w}")));
            }
        }
        Ok(())
    }
}

/// `corr · (1 − Pearson(I_g, PPS(e^z))) + smooth · REG(z) + reference · mean_M (e^z − D_ref)²`
/// as a function of log-depth `z`.
pub struct Objective<'a, T> {
    gray: ImageGray<T>,
    k: &'a CameraIntrinsics<T>,
    light: &'a LightSpec<T>,
    mask: &'a Mask,
    weights: ObjectiveWeights<T>,
    reference: Option<&'a DepthMap<T>>,
    regularizer: EdgeAwareSmoothness,
}

impl<'a, T: Real> Objective<'a, T> {
    pub fn new(
        image: &ImageRgb<T>,
        k: &'a CameraIntrinsics<T>,
        light: &'a LightSpec<T>,
        mask: &'a Mask,
        weights: ObjectiveWeights<T>,
        reference: Option<&'a DepthMap<T>>,
    ) -> Result<Self> {
        weights.validate()?;
        image.grid().check_shape(mask)?;
        if let Some(r) = reference {
            r.grid().check_shape(mask)?;
        }
        Ok(Self {
            gray: luminance(image),
            k,
            light,
            mask,
            weights,
            reference,
            regularizer: EdgeAwareSmoothness,
        })
    }

    pub fn gray(&self) -> &ImageGray<T> {
        &self.gray
    }

    /// Objective value and gradient with respect to log-depth.
    pub fn evaluate(&self, log_depth: &Grid<T>) -> Result<(T, Grid<T>)> {
        let depth = DepthMap::new(log_depth.map(|z| z.exp()))?;
        let (w, h) = (depth.width(), depth.height());
        let mut value = T::zero();
        let mut grad = Grid::filled(w, h, T::zero());

        if self.weights.corr > T::zero() {
            let tape = PpsTape::record(&depth, self.k, self.light)?;
            let (loss, grad_pps) = corr_loss_and_pps_grad(&tape, &self.gray, self.mask)?;
            let grad_depth = tape.backward(&grad_pps)?;
            value = value + self.weights.corr * loss;
            for (i, g) in grad.as_mut_slice().iter_mut().enumerate() {
                *g = *g + self.weights.corr * grad_depth.as_slice()[i] * depth.grid().as_slice()[i];
            }
        }
        if self.weights.smooth > T::zero() {
            let (reg, grad_reg) = self.regularizer.value_and_grad(log_depth, &self.gray)?;
            value = value + self.weights.smooth * reg;
            for (g, &r) in grad.as_mut_slice().iter_mut().zip(grad_reg.as_slice()) {
                *g = *g + self.weights.smooth * r;
            }
        }
        if let (Some(reference), true) = (self.reference, self.weights.reference > T::zero()) {
            let n = T::from_usize_lossy(self.mask.count_valid().max(1));
            let mut sum = T::zero();
            for (i, g) in grad.as_mut_slice().iter_mut().enumerate() {
                if !self.mask.as_slice()[i] {
                    continue;
                }
                let d = depth.grid().as_slice()[i];
                let r = d - reference.grid().as_slice()[i];
                sum = sum + r * r;
                *g = *g + self.weights.reference * T::two() * r * d / n;
            }
            value = value + self.weights.reference * sum / n;
        }
        Ok((value, grad))
    }
}

/// Objective value and its gradient with respect to log-depth.
pub fn objective_and_gradient<T: Real>(
    depth: &DepthMap<T>,
    image: &ImageRgb<T>,
    k: &CameraIntrinsics<T>,
    light: &LightSpec<T>,
    mask: &Mask,
    weights: ObjectiveWeights<T>,
) -> Result<(T, Grid<T>)> {
    let objective = Objective::new(image, k, light, mask, weights, None)?;
    objective.evaluate(&depth.grid().map(|d| d.ln()))
}
