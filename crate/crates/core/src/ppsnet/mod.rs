//! Forward-only toy version of the depth refinement network: patch
//! features, cross-attention, FiLM and a small residual conv refiner.

mod attention;
mod film;
mod forward;
mod refiner;
mod tensor;
pub mod weights;

pub use attention::{cross_attention, cross_attention_with_weights};
pub use film::{film_modulate, FilmParams};
pub use forward::{ppsnet_forward, FeatureEncoder, ForwardTrace, PatchEncoder, PATCH};
pub use refiner::{toy_refiner_forward, GRID_DIVISOR};
pub use tensor::{FeatureMap, Tensor3};
pub use weights::{NamedTensor, ToyWeights};
