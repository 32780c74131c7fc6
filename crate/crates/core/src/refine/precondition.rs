//! Sobolev (H¹) gradient: solves `(I + λ L) p = g` with `L` the 4-neighbour
//! graph Laplacian (Neumann boundary), which damps high spatial frequencies
//! of the descent direction while leaving its low frequencies untouched.

use crate::grid::Grid;
use crate::Real;

const CG_MAX_ITERS: usize = 200;
const CG_REL_TOL: f64 = 1e-10;

fn apply<T: Real>(x: &[T], w: usize, h: usize, lambda: T, out: &mut [T]) {
    for v in 0..h {
        for u in 0..w {
            let i = v * w + u;
            let mut lap = T::zero();
            if u > 0 {
                lap = lap + x[i] - x[i - 1];
            }
            if u + 1 < w {
                lap = lap + x[i] - x[i + 1];
            }
            if v > 0 {
                lap = lap + x[i] - x[i - w];
            }
            if v + 1 < h {
                lap = lap + x[i] - x[i + w];
            }
            out[i] = x[i] + lambda * lap;
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Conjugate-gradient solve of `(I + λ L) p = g`. `λ = 0` returns `g`.
pub fn sobolev_gradient<T: Real>(grad: &Grid<T>, lambda: T) -> Grid<T> {
    if lambda == T::zero() {
        return grad.clone();
    }
    let (w, h) = (grad.width(), grad.height());
    let b = grad.as_slice();
    let n = b.len();
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![T::zero(); n];
    let mut rr = dot(&r, &r);
    let stop = T::lit(CG_REL_TOL * CG_REL_TOL) * rr;
    for _ in 0..CG_MAX_ITERS {
        if rr <= stop || rr == T::zero() {
            break;
        }
        apply(&p, w, h, lambda, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Grid::from_vec(w, h, x).expect("shape preserved")
}
