use crate::error::{Error, Result};
use crate::ppsnet::FeatureMap;
use crate::Real;

/// `Softmax(Q Kᵀ / √d_k) V`, optionally split into `heads` equal column
/// blocks of Q/K/V whose outputs are concatenated.
pub fn cross_attention<T: Real>(
    q: &FeatureMap<T>,
    k: &FeatureMap<T>,
    v: &FeatureMap<T>,
    heads: usize,
) -> Result<FeatureMap<T>> {
    cross_attention_with_weights(q, k, v, heads).map(|(out, _)| out)
}

/// As [`cross_attention`], also returning each head's `Tq × Tk` attention
/// matrix.
pub fn cross_attention_with_weights<T: Real>(
    q: &FeatureMap<T>,
    k: &FeatureMap<T>,
    v: &FeatureMap<T>,
    heads: usize,
) -> Result<(FeatureMap<T>, Vec<FeatureMap<T>>)> {
    if k.tokens() != v.tokens() {
        return Err(Error::InvalidParameter(format!(
            "keys have {} tokens but values have {}",
            k.tokens(),
            v.tokens()
        )));
    }
    if q.dim() != k.dim() {
        return Err(Error::InvalidParameter(format!(
            "query dim {} differs from key dim {}",
            q.dim(),
            k.dim()
        )));
    }
    if heads == 0 || q.dim() % heads != 0 || v.dim() % heads != 0 {
        return Err(Error::InvalidParameter(format!(
            "{heads} heads do not divide dims {} / {}",
            q.dim(),
            v.dim()
        )));
    }
    let (tq, tk) = (q.tokens(), k.tokens());
    let dk = q.dim() / heads;
    let dv = v.dim() / heads;
    let scale = T::one() / T::from_usize_lossy(dk).sqrt();
    let mut out = vec![T::zero(); tq * v.dim()];
    let mut maps = Vec::with_capacity(heads);
    for h in 0..heads {
        let mut attn = vec![T::zero(); tq * tk];
        for i in 0..tq {
            let qi = &q.row(i)[h * dk..(h + 1) * dk];
            let scores = &mut attn[i * tk..(i + 1) * tk];
            for (j, s) in scores.iter_mut().enumerate() {
                let kj = &k.row(j)[h * dk..(h + 1) * dk];
                *s = qi.iter().zip(kj).map(|(&a, &b)| a * b).sum::<T>() * scale;
            }
            softmax_in_place(scores);
            for (j, &a) in scores.iter().enumerate() {
                let vj = &v.row(j)[h * dv..(h + 1) * dv];
                for (c, &x) in vj.iter().enumerate() {
                    let o = &mut out[i * v.dim() + h * dv + c];
                    *o = *o + a * x;
                }
            }
        }
        maps.push(FeatureMap::new(tq, tk, attn)?);
    }
    Ok((FeatureMap::new(tq, v.dim(), out)?, maps))
}

fn softmax_in_place<T: Real>(xs: &mut [T]) {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    let mut total = T::zero();
    for x in xs.iter_mut() {
        *x = (*x - max).exp();
        total = total + *x;
    }
    for x in xs.iter_mut() {
        *x = *x / total;
    }
}
