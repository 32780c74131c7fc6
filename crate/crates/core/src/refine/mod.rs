//! Depth refinement by first-order minimization of the shading-correlation
//! objective over a per-pixel log-depth field.

mod objective;
mod optimizer;
mod precondition;

pub use objective::{objective_and_gradient, Objective, ObjectiveWeights};
pub use precondition::sobolev_gradient;
pub use optimizer::{
    refine_depth, refine_depth_with_reference, Parameterization, RefineConfig, RefineResult, MAX_HALVINGS,
};
