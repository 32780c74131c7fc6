use crate::error::{Error, Result};
use crate::geometry::{pps_from_depth, CameraIntrinsics, DepthMap, LightSpec};
use crate::grid::Grid;
use crate::photometrics::{albedo_proxy, ImageRgb};
use crate::ppsnet::refiner::{toy_refiner_forward, GRID_DIVISOR};
use crate::ppsnet::weights::{ToyWeights, PATCH_DIM};
use crate::ppsnet::{cross_attention, film_modulate, FeatureMap, FilmParams, Tensor3};
use crate::Real;

/// Stand-in for the image backbone: turns a three-channel map into tokens.
pub trait FeatureEncoder<T: Real> {
    fn encode(&self, pixels: &Grid<[T; 3]>) -> Result<FeatureMap<T>>;
}

/// One token per non-overlapping 8×8 patch, raster order, each token the
/// patch flattened as `(y, x, channel)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PatchEncoder;

pub const PATCH: usize = 8;

impl<T: Real> FeatureEncoder<T> for PatchEncoder {
    fn encode(&self, pixels: &Grid<[T; 3]>) -> Result<FeatureMap<T>> {
        let (w, h) = (pixels.width(), pixels.height());
        if w % PATCH != 0 || h % PATCH != 0 || w == 0 || h == 0 {
            return Err(Error::IndivisibleGrid {
                width: w,
                height: h,
                divisor: PATCH,
                padded_w: w.div_ceil(PATCH).max(1) * PATCH,
                padded_h: h.div_ceil(PATCH).max(1) * PATCH,
            });
        }
        let (pw, ph) = (w / PATCH, h / PATCH);
        let mut data = Vec::with_capacity(pw * ph * PATCH_DIM);
        for py in 0..ph {
            for px in 0..pw {
                for y in 0..PATCH {
                    for x in 0..PATCH {
                        data.extend_from_slice(pixels.get(px * PATCH + x, py * PATCH + y));
                    }
                }
            }
        }
        FeatureMap::new(pw * ph, PATCH_DIM, data)
    }
}

/// Every intermediate of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    /// `D_init + Δ`; may contain non-positive values.
    pub refined: Grid<T>,
    pub negative_count: usize,
    /// Albedo proxy times shading, per channel.
    pub pps_features: Grid<[T; 3]>,
    pub x_combo: FeatureMap<T>,
    pub film: FilmParams<T>,
    pub modulated: Grid<T>,
    pub delta: Grid<T>,
}

impl<T: Real> ForwardTrace<T> {
    /// The refined depth, failing if the residual pushed any pixel to
    /// zero or below.
    pub fn refined_depth(&self) -> Result<DepthMap<T>> {
        DepthMap::new(self.refined.clone())
    }
}

fn film_params<T: Real>(x_combo: &FeatureMap<T>, weights: &ToyWeights) -> Result<FilmParams<T>> {
    let pooled = x_combo.mean_token();
    let w = &weights.get("film.weight")?.data;
    let b = &weights.get("film.bias")?.data;
    let d = pooled.len();
    let lin = |row: usize| {
        pooled
            .iter()
            .zip(&w[row * d..(row + 1) * d])
            .map(|(&x, &wi)| x * T::lit(f64::from(wi)))
            .sum::<T>()
            + T::lit(f64::from(b[row]))
    };
    Ok(FilmParams {
        gamma: vec![lin(0)],
        beta: vec![lin(1)],
    })
}

fn project<T: Real>(feats: &FeatureMap<T>, weights: &ToyWeights, name: &str) -> Result<FeatureMap<T>> {
    let w: Vec<T> = weights.get(name)?.data.iter().map(|&v| T::lit(f64::from(v))).collect();
    feats.matmul(&w, weights.embed_dim)
}

/// Residual forward pass: features, PPS features, cross-attention with
/// RGB as queries and PPS as keys/values, FiLM on the initial depth,
/// refiner, `D_init + Δ`.
pub fn ppsnet_forward<T: Real>(
    image: &ImageRgb<T>,
    d_init: &DepthMap<T>,
    k: &CameraIntrinsics<T>,
    light: &LightSpec<T>,
    weights: &ToyWeights,
    encoder: &dyn FeatureEncoder<T>,
    heads: usize,
) -> Result<ForwardTrace<T>> {
    weights.validate()?;
    d_init.grid().check_shape(image.grid())?;
    let (w, h) = (image.width(), image.height());
    if w % GRID_DIVISOR != 0 || h % GRID_DIVISOR != 0 {
        return Err(Error::IndivisibleGrid {
            width: w,
            height: h,
            divisor: GRID_DIVISOR,
            padded_w: w.div_ceil(GRID_DIVISOR) * GRID_DIVISOR,
            padded_h: h.div_ceil(GRID_DIVISOR) * GRID_DIVISOR,
        });
    }

    let rgb_feats = encoder.encode(image.grid())?;
    let field = pps_from_depth(d_init, k, light)?;
    let proxy = albedo_proxy(image);
    let pps_features = Grid::from_fn(w, h, |u, v| {
        let s = *field.pps.get(u, v);
        proxy.get(u, v).map(|c| c * s)
    });
    let pps_feats = encoder.encode(&pps_features)?;

    let q = project(&rgb_feats, weights, "attn.q")?;
    let kk = project(&pps_feats, weights, "attn.k")?;
    let v = project(&pps_feats, weights, "attn.v")?;
    let x_combo = cross_attention(&q, &kk, &v, heads)?;

    let film = film_params(&x_combo, weights)?;
    let d = Tensor3::from_vec(1, h, w, d_init.grid().as_slice().to_vec())?;
    let modulated = Grid::from_vec(w, h, film_modulate(&d, &film)?.data)?;
    let delta = toy_refiner_forward(&modulated, weights)?;

    let refined = Grid::from_fn(w, h, |u, v| d_init.get(u, v) + *delta.get(u, v));
    if refined.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteTerm("refined depth"));
    }
    let negative_count = refined.as_slice().iter().filter(|&&x| x <= T::zero()).count();
    Ok(ForwardTrace {
        refined,
        negative_count,
        pps_features,
        x_combo,
        film,
        modulated,
        delta,
    })
}
