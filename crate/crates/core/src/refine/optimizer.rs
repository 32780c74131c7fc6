use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, DepthMap, LightSpec};
use crate::grid::{Grid, Mask};
use crate::photometrics::ImageRgb;
use crate::refine::precondition::sobolev_gradient;
use crate::refine::{Objective, ObjectiveWeights};
use crate::Real;

/// Maximum number of step halvings per line search.
pub const MAX_HALVINGS: usize = 20;
/// Sufficient-decrease constant of the Armijo test.
const ARMIJO_C: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Parameterization {
    #[default]
    LogDepth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineConfig {
    pub max_iters: usize,
    /// Initial trial step of the first line search.
    pub step_size: f64,
    pub parameterization: Parameterization,
    pub weight_corr: f64,
    pub weight_smooth: f64,
    /// Weight of the L2 pull towards a reference depth; 0 disables it.
    pub weight_reference: f64,
    /// Stop once an accepted step lowers the loss by less than this fraction.
    pub stop_tol: f64,
    /// Sobolev smoothing length λ of the descent direction, in pixels²;
    /// 0 gives plain gradient descent.
    pub sobolev_lambda: f64,
    /// Seed for randomized test perturbations; the optimizer is deterministic.
    pub seed: u64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            step_size: 1.0,
            parameterization: Parameterization::LogDepth,
            weight_corr: 1.0,
            weight_smooth: 0.0,
            weight_reference: 0.0,
            stop_tol: 1e-9,
            sobolev_lambda: 100.0,
            seed: 0,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidParameter(format!("step_size must be > 0, got {}", self.step_size)));
        }
        if !(self.sobolev_lambda >= 0.0 && self.sobolev_lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sobolev_lambda must be >= 0, got {}",
                self.sobolev_lambda
            )));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("stop_tol must be >= 0, got {}", self.stop_tol)));
        }
        Ok(())
    }

    fn weights<T: Real>(&self) -> ObjectiveWeights<T> {
        ObjectiveWeights {
            corr: T::lit(self.weight_corr),
            smooth: T::lit(self.weight_smooth),
            reference: T::lit(self.weight_reference),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RefineResult<T> {
    pub refined: DepthMap<T>,
    /// Objective at the initial iterate followed by every accepted iterate.
    pub loss_trace: Vec<T>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl<T: Real> RefineResult<T> {
    /// `iteration,loss` rows with a header line.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration,loss\n");
        for (i, l) in self.loss_trace.iter().enumerate() {
            let _ = writeln!(s, "{i},{l:e}");
        }
        s
    }
}

pub fn refine_depth<T: Real>(
    init: &DepthMap<T>,
    image: &ImageRgb<T>,
    k: &CameraIntrinsics<T>,
    light: &LightSpec<T>,
    mask: &Mask,
    config: &RefineConfig,
) -> Result<RefineResult<T>> {
    refine_depth_with_reference(init, image, k, light, mask, config, None)
}

/// Gradient descent on log-depth with Armijo backtracking. Every accepted
/// step strictly lowers the objective, so the recorded trace is
/// non-increasing.
pub fn refine_depth_with_reference<T: Real>(
    init: &DepthMap<T>,
    image: &ImageRgb<T>,
    k: &CameraIntrinsics<T>,
    light: &LightSpec<T>,
    mask: &Mask,
    config: &RefineConfig,
    reference: Option<&DepthMap<T>>,
) -> Result<RefineResult<T>> {
    config.validate()?;
    let objective = Objective::new(image, k, light, mask, config.weights(), reference)?;
    let mut z: Grid<T> = init.grid().map(|d| d.ln());
    let (mut f, mut g) = objective.evaluate(&z)?;
    let mut trace = vec![f];
    let mut step = T::lit(config.step_size);
    let mut converged = false;
    let mut iterations = 0;
    let armijo = T::lit(ARMIJO_C);

    for iteration in 0..config.max_iters {
        if g.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration });
        }
        let direction = sobolev_gradient(&g, T::lit(config.sobolev_lambda));
        let slope: T = direction.as_slice().iter().zip(g.as_slice()).map(|(&p, &x)| p * x).sum();
        if !(slope > T::zero()) {
            converged = true;
            break;
        }
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = Grid::from_vec(
                z.width(),
                z.height(),
                z.as_slice().iter().zip(direction.as_slice()).map(|(&zi, &pi)| zi - step * pi).collect(),
            )?;
            if let Ok((f_new, g_new)) = objective.evaluate(&trial) {
                if f_new.is_finite() && f_new <= f - armijo * step * slope && f_new < f {
                    accepted = Some((trial, f_new, g_new));
                    break;
                }
            }
            step = step / T::two();
        }
        let Some((z_new, f_new, g_new)) = accepted else {
            converged = true;
            break;
        };
        let decrease = (f - f_new) / f.abs().max(T::min_positive_value());
        z = z_new;
        f = f_new;
        g = g_new;
        trace.push(f);
        iterations += 1;
        step = step * T::two();
        if decrease < T::lit(config.stop_tol) {
            converged = true;
            break;
        }
    }

    Ok(RefineResult {
        refined: DepthMap::new(z.map(|x| x.exp()))?,
        loss_trace: trace,
        iterations_used: iterations,
        converged,
    })
}
