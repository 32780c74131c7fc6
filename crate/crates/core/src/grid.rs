//! Dense row-major H×W containers.

use crate::error::{Error, Result};

/// Row-major grid indexed by pixel column `u` and row `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<V> {
    width: usize,
    height: usize,
    data: Vec<V>,
}

impl<V: Clone> Grid<V> {
    pub fn filled(width: usize, height: usize, value: V) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<V> Grid<V> {
    pub fn from_vec(width: usize, height: usize, data: Vec<V>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "grid data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> V) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                data.push(f(u, v));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, u: usize, v: usize) -> usize {
        v * self.width + u
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> &V {
        &self.data[v * self.width + u]
    }

    #[inline]
    pub fn get_mut(&mut self, u: usize, v: usize) -> &mut V {
        &mut self.data[v * self.width + u]
    }

    #[inline]
    pub fn as_slice(&self) -> &[V] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [V] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<V> {
        self.data
    }

    pub fn same_shape<W>(&self, other: &Grid<W>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn check_shape<W>(&self, other: &Grid<W>) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected_w: self.width,
                expected_h: self.height,
                got_w: other.width,
                got_h: other.height,
            })
        }
    }

    pub fn map<W>(&self, f: impl FnMut(&V) -> W) -> Grid<W> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Yields `(u, v, &value)` in row-major order.
    pub fn enumerate(&self) -> impl Iterator<Item = (usize, usize, &V)> {
        let w = self.width;
        self.data.iter().enumerate().map(move |(i, x)| (i % w, i / w, x))
    }
}

/// Validity mask: `true` marks a pixel that takes part in a computation.
pub type Mask = Grid<bool>;

impl Grid<bool> {
    pub fn full(width: usize, height: usize) -> Self {
        Self::filled(width, height, true)
    }

    pub fn count_valid(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn and(&self, other: &Mask) -> Result<Mask> {
        self.check_shape(other)?;
        Ok(Grid {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a && b)
                .collect(),
        })
    }
}
