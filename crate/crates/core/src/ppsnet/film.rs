use crate::error::{Error, Result};
use crate::ppsnet::Tensor3;
use crate::Real;

/// Per-channel scale `gamma` and shift `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilmParams<T> {
    pub gamma: Vec<T>,
    pub beta: Vec<T>,
}

impl<T: Real> FilmParams<T> {
    pub fn identity(channels: usize) -> Self {
        Self {
            gamma: vec![T::one(); channels],
            beta: vec![T::zero(); channels],
        }
    }
}

/// `γ_c · x + β_c` for every element of channel `c`.
pub fn film_modulate<T: Real>(x: &Tensor3<T>, params: &FilmParams<T>) -> Result<Tensor3<T>> {
    if params.gamma.len() != x.channels || params.beta.len() != x.channels {
        return Err(Error::InvalidParameter(format!(
            "FiLM has {}/{} parameters for {} channels",
            params.gamma.len(),
            params.beta.len(),
            x.channels
        )));
    }
    let plane = x.height * x.width;
    let data = x
        .data
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = i / plane;
            params.gamma[c] * v + params.beta[c]
        })
        .collect();
    Tensor3::from_vec(x.channels, x.height, x.width, data)
}
