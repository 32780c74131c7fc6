use crate::error::Result;
use crate::grid::Grid;
use crate::photometrics::ImageRgb;
use crate::Real;

/// Per-pixel RGB reflectance in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlbedoMap<T>(Grid<[T; 3]>);

impl<T: Real> AlbedoMap<T> {
    pub fn new(values: Grid<[T; 3]>) -> Result<Self> {
        // same range contract as an image
        ImageRgb::new(values).map(|img| Self(img.grid().clone()))
    }

    pub fn constant(width: usize, height: usize, rho: [T; 3]) -> Result<Self> {
        Self::new(Grid::filled(width, height, rho))
    }

    pub(crate) fn from_grid_unchecked(values: Grid<[T; 3]>) -> Self {
        Self(values)
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

/// RGB → (hue in degrees `[0, 360)`, saturation, value).
pub fn rgb_to_hsv<T: Real>([r, g, b]: [T; 3]) -> [T; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let sixty = T::lit(60.0);
    let hue = if delta == T::zero() {
        T::zero()
    } else if max == r {
        let h = sixty * ((g - b) / delta);
        if h < T::zero() {
            h + T::lit(360.0)
        } else {
            h
        }
    } else if max == g {
        sixty * ((b - r) / delta + T::two())
    } else {
        sixty * ((r - g) / delta + T::lit(4.0))
    };
    let sat = if max == T::zero() { T::zero() } else { delta / max };
    [hue, sat, max]
}

pub fn hsv_to_rgb<T: Real>([h, s, v]: [T; 3]) -> [T; 3] {
    let c = v * s;
    let hp = (h / T::lit(60.0)) % T::lit(6.0);
    let x = c * (T::one() - ((hp % T::two()) - T::one()).abs());
    let z = T::zero();
    let sector = hp.floor().to_i32().unwrap_or(0);
    let (r, g, b) = match sector {
        0 => (c, x, z),
        1 => (x, c, z),
        2 => (z, c, x),
        3 => (z, x, c),
        4 => (x, z, c),
        _ => (c, z, x),
    };
    let m = v - c;
    [r + m, g + m, b + m]
}

/// Hue and saturation of the image with value forced to 1.
pub fn albedo_proxy<T: Real>(image: &ImageRgb<T>) -> AlbedoMap<T> {
    AlbedoMap(image.grid().map(|&px| {
        let [h, s, _] = rgb_to_hsv(px);
        hsv_to_rgb([h, s, T::one()]).map(|c| c.max(T::zero()).min(T::one()))
    }))
}
