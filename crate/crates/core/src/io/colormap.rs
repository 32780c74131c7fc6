//! Fixed false-colour map for depth and shading images: blue for small
//! values (near), through cyan, green and yellow, to red for large (far).

use crate::grid::{Grid, Mask};
use crate::photometrics::ImageRgb;
use crate::Real;

const STOPS: [[f64; 3]; 5] = [
    [0.0, 0.0, 1.0],
    [0.0, 1.0, 1.0],
    [0.0, 1.0, 0.0],
    [1.0, 1.0, 0.0],
    [1.0, 0.0, 0.0],
];

/// Colour for `t` in `[0, 1]` (clamped), linear between stops.
pub fn colormap(t: f64) -> [f64; 3] {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let x = t * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    [0, 1, 2].map(|c| a[c] + f * (b[c] - a[c]))
}

/// Normalizes by the min/max over finite masked values; pixels outside
/// the mask are black.
pub fn false_color<T: Real>(values: &Grid<T>, mask: Option<&Mask>) -> ImageRgb<f64> {
    let keep = |u: usize, v: usize| mask.is_none_or(|m| *m.get(u, v));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (u, v, x) in values.enumerate() {
        let x = x.to_f64_lossy();
        if keep(u, v) && x.is_finite() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    let grid = Grid::from_fn(values.width(), values.height(), |u, v| {
        let x = values.get(u, v).to_f64_lossy();
        if keep(u, v) && x.is_finite() {
            colormap((x - lo) / span)
        } else {
            [0.0; 3]
        }
    });
    ImageRgb::new(grid).expect("colormap output lies in [0, 1]")
}
