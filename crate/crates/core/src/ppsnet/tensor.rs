//! Minimal dense tensors for the toy network: token matrices and
//! channel-major feature grids.

use crate::error::{Error, Result};
use crate::Real;

/// `tokens × dim` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    tokens: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> FeatureMap<T> {
    pub fn new(tokens: usize, dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 || data.len() != tokens * dim {
            return Err(Error::InvalidParameter(format!(
                "feature map {tokens}x{dim} cannot hold {} values",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("feature map entries must be finite".into()));
        }
        Ok(Self { tokens, dim, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("ragged feature rows".into()));
        }
        Self::new(rows.len(), dim, rows.concat())
    }

    pub fn tokens(&self) -> usize {
        self.tokens
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, t: usize) -> &[T] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// `self · w` with `w` given as a row-major `dim × out` matrix.
    pub fn matmul(&self, w: &[T], out: usize) -> Result<Self> {
        if w.len() != self.dim * out {
            return Err(Error::InvalidParameter(format!(
                "projection of {} values does not map {} -> {out}",
                w.len(),
                self.dim
            )));
        }
        let mut data = vec![T::zero(); self.tokens * out];
        for t in 0..self.tokens {
            let row = self.row(t);
            let dst = &mut data[t * out..(t + 1) * out];
            for (i, &x) in row.iter().enumerate() {
                for (o, d) in dst.iter_mut().enumerate() {
                    *d = *d + x * w[i * out + o];
                }
            }
        }
        Self::new(self.tokens, out, data)
    }

    /// Mean over tokens.
    pub fn mean_token(&self) -> Vec<T> {
        let n = T::from_usize_lossy(self.tokens.max(1));
        (0..self.dim)
            .map(|j| (0..self.tokens).map(|t| self.data[t * self.dim + j]).sum::<T>() / n)
            .collect()
    }
}

/// `channels × height × width` grid, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<T>,
}

impl<T: Real> Tensor3<T> {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![T::zero(); channels * height * width],
        }
    }

    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::InvalidParameter(format!(
                "tensor {channels}x{height}x{width} cannot hold {} values",
                data.len()
            )));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    #[inline]
    pub fn at(&self, c: usize, y: usize, x: usize) -> T {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    fn at_mut(&mut self, c: usize, y: usize, x: usize) -> &mut T {
        &mut self.data[(c * self.height + y) * self.width + x]
    }

    /// Zero-padded "same" convolution, no bias. `weight` is
    /// `[out][in][k][k]` row-major with odd `k`.
    pub fn conv2d(&self, weight: &[T], out_channels: usize, k: usize) -> Result<Self> {
        if weight.len() != out_channels * self.channels * k * k || k % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "conv kernel of {} values does not match {out_channels}x{}x{k}x{k}",
                weight.len(),
                self.channels
            )));
        }
        let r = (k / 2) as isize;
        let mut out = Self::zeros(out_channels, self.height, self.width);
        for o in 0..out_channels {
            for i in 0..self.channels {
                let kernel = &weight[(o * self.channels + i) * k * k..(o * self.channels + i + 1) * k * k];
                for y in 0..self.height {
                    for x in 0..self.width {
                        let mut acc = T::zero();
                        for ky in 0..k {
                            let sy = y as isize + ky as isize - r;
                            if sy < 0 || sy >= self.height as isize {
                                continue;
                            }
                            for kx in 0..k {
                                let sx = x as isize + kx as isize - r;
                                if sx < 0 || sx >= self.width as isize {
                                    continue;
                                }
                                acc = acc + kernel[ky * k + kx] * self.at(i, sy as usize, sx as usize);
                            }
                        }
                        *out.at_mut(o, y, x) = out.at(o, y, x) + acc;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn relu(mut self) -> Self {
        for x in &mut self.data {
            *x = x.max(T::zero());
        }
        self
    }

    /// 2×2 average pooling; dimensions must be even.
    pub fn avg_pool2(&self) -> Self {
        let (h, w) = (self.height / 2, self.width / 2);
        let quarter = T::lit(0.25);
        let mut out = Self::zeros(self.channels, h, w);
        for c in 0..self.channels {
            for y in 0..h {
                for x in 0..w {
                    let s = self.at(c, 2 * y, 2 * x)
                        + self.at(c, 2 * y, 2 * x + 1)
                        + self.at(c, 2 * y + 1, 2 * x)
                        + self.at(c, 2 * y + 1, 2 * x + 1);
                    *out.at_mut(c, y, x) = s * quarter;
                }
            }
        }
        out
    }

    pub fn upsample2(&self) -> Self {
        let mut out = Self::zeros(self.channels, self.height * 2, self.width * 2);
        for c in 0..self.channels {
            for y in 0..out.height {
                for x in 0..out.width {
                    *out.at_mut(c, y, x) = self.at(c, y / 2, x / 2);
                }
            }
        }
        out
    }

    pub fn concat(&self, other: &Self) -> Self {
        debug_assert_eq!((self.height, self.width), (other.height, other.width));
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self {
            channels: self.channels + other.channels,
            height: self.height,
            width: self.width,
            data,
        }
    }
}
