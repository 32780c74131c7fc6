//! Shading losses, scale/shift alignment, smoothness, loss aggregation and
//! depth metrics.

mod aggregate;
mod metrics;
mod pps;
mod smooth;
mod ssi;

pub use aggregate::{aggregate_loss, LossTerms, LossWeights};
pub use metrics::{depth_metrics, Alignment, MetricReport};
pub(crate) use pps::corr_loss_and_pps_grad;
pub use pps::{pps_corr_loss, pps_corr_loss_with_grad, pps_sup_loss, pps_sup_loss_with_grad};
pub use smooth::{log_depth, smoothness_reg, smoothness_reg_with_grad, DepthRegularizer, EdgeAwareSmoothness};
pub use ssi::{ssi_align, ssi_loss, ssi_loss_with_grad, ScaleShift};
