use crate::error::{Error, Result};
use crate::grid::{Grid, Mask};
use crate::Real;

/// Default saturation threshold for the specular mask.
pub const SPECULAR_THRESHOLD: f64 = 0.98;

/// Rec.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

fn check_unit<T: Real>(x: T, u: usize, v: usize) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "intensity {x} at pixel ({u}, {v}) outside [0, 1]"
        )))
    }
}

/// RGB image with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRgb<T>(Grid<[T; 3]>);

impl<T: Real> ImageRgb<T> {
    pub fn new(pixels: Grid<[T; 3]>) -> Result<Self> {
        for (u, v, px) in pixels.enumerate() {
            for &c in px {
                check_unit(c, u, v)?;
            }
        }
        Ok(Self(pixels))
    }

    pub fn from_fn(width: usize, height: usize, f: impl FnMut(usize, usize) -> [T; 3]) -> Result<Self> {
        Self::new(Grid::from_fn(width, height, f))
    }

    pub fn grid(&self) -> &Grid<[T; 3]> {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> [T; 3] {
        *self.0.get(u, v)
    }
}

/// Single-channel intensity image in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGray<T>(Grid<T>);

impl<T: Real> ImageGray<T> {
    pub fn new(pixels: Grid<T>) -> Result<Self> {
        for (u, v, &c) in pixels.enumerate() {
            check_unit(c, u, v)?;
        }
        Ok(Self(pixels))
    }

    pub fn from_fn(width: usize, height: usize, f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        Self::new(Grid::from_fn(width, height, f))
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> T {
        *self.0.get(u, v)
    }
}

/// `0.299 R + 0.587 G + 0.114 B`, clamped to `[0, 1]`.
pub fn luminance<T: Real>(image: &ImageRgb<T>) -> ImageGray<T> {
    let [wr, wg, wb] = LUMA_WEIGHTS.map(T::lit);
    ImageGray(image.grid().map(|&[r, g, b]| {
        (wr * r + wg * g + wb * b).max(T::zero()).min(T::one())
    }))
}

/// Marks pixels strictly below `threshold` as valid; saturated pixels are
/// excluded as specular highlights.
pub fn specular_mask<T: Real>(gray: &ImageGray<T>, threshold: T) -> Result<Mask> {
    if !(threshold > T::zero() && threshold <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "specular threshold must lie in (0, 1], got {threshold}"
        )));
    }
    Ok(gray.grid().map(|&g| g < threshold))
}
