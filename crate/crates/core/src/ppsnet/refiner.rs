use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::ppsnet::weights::{ToyWeights, KERNEL, LEVEL_CHANNELS};
use crate::ppsnet::Tensor3;
use crate::Real;

/// Three 2× downsamplings.
pub const GRID_DIVISOR: usize = 8;

fn conv<T: Real>(x: &Tensor3<T>, w: &ToyWeights, name: &str, out: usize, k: usize) -> Result<Tensor3<T>> {
    let kernel: Vec<T> = w.get(name)?.data.iter().map(|&v| T::lit(f64::from(v))).collect();
    x.conv2d(&kernel, out, k)
}

/// Four-level encoder-decoder over a single-channel grid. No biases, so
/// all-zero kernels give an all-zero output.
pub fn toy_refiner_forward<T: Real>(input: &Grid<T>, weights: &ToyWeights) -> Result<Grid<T>> {
    let (w, h) = (input.width(), input.height());
    if w == 0 || h == 0 || w % GRID_DIVISOR != 0 || h % GRID_DIVISOR != 0 {
        return Err(Error::IndivisibleGrid {
            width: w,
            height: h,
            divisor: GRID_DIVISOR,
            padded_w: w.div_ceil(GRID_DIVISOR).max(1) * GRID_DIVISOR,
            padded_h: h.div_ceil(GRID_DIVISOR).max(1) * GRID_DIVISOR,
        });
    }
    let [c0, c1, c2, c3] = LEVEL_CHANNELS;
    let x = Tensor3::from_vec(1, h, w, input.as_slice().to_vec())?;

    let e0 = conv(&x, weights, "refiner.enc0", c0, KERNEL)?.relu();
    let e1 = conv(&e0.avg_pool2(), weights, "refiner.enc1", c1, KERNEL)?.relu();
    let e2 = conv(&e1.avg_pool2(), weights, "refiner.enc2", c2, KERNEL)?.relu();
    let e3 = conv(&e2.avg_pool2(), weights, "refiner.enc3", c3, KERNEL)?.relu();

    let d2 = conv(&e3.upsample2().concat(&e2), weights, "refiner.dec2", c2, KERNEL)?.relu();
    let d1 = conv(&d2.upsample2().concat(&e1), weights, "refiner.dec1", c1, KERNEL)?.relu();
    let d0 = conv(&d1.upsample2().concat(&e0), weights, "refiner.dec0", c0, KERNEL)?.relu();
    let out = conv(&d0, weights, "refiner.head", 1, 1)?;

    Grid::from_vec(w, h, out.data)
}
