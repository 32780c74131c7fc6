//! Toy network parameters and the `PPSW` binary container.
//!
//! Layout (all integers `u32` little-endian):
//!
//! ```text
//! "PPSW" | version=1 | count
//! repeated count times:
//!     name_len | name (UTF-8) | rank | dims[rank] | f32 LE data (row-major)
//! ```

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PPSW";
pub const VERSION: u32 = 1;

/// Flattened patch size fed to the attention projections (8×8×RGB).
pub const PATCH_DIM: usize = 8 * 8 * 3;
/// Refiner channel widths per level.
pub const LEVEL_CHANNELS: [usize; 4] = [4, 8, 16, 16];
pub const KERNEL: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub dims: Vec<usize>,
    pub data: Vec<f32>,
}

impl NamedTensor {
    fn numel(dims: &[usize]) -> usize {
        dims.iter().product()
    }
}

/// Named parameter set. Iteration order is by name.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyWeights {
    pub embed_dim: usize,
    tensors: BTreeMap<String, NamedTensor>,
}

/// Expected `(name, dims)` for every tensor of a network with attention
/// width `d`.
pub fn layout(d: usize) -> Vec<(String, Vec<usize>)> {
    let [c0, c1, c2, c3] = LEVEL_CHANNELS;
    let conv = |name: &str, o: usize, i: usize, k: usize| (name.to_string(), vec![o, i, k, k]);
    vec![
        ("attn.q".into(), vec![PATCH_DIM, d]),
        ("attn.k".into(), vec![PATCH_DIM, d]),
        ("attn.v".into(), vec![PATCH_DIM, d]),
        ("film.weight".into(), vec![2, d]),
        ("film.bias".into(), vec![2]),
        conv("refiner.enc0", c0, 1, KERNEL),
        conv("refiner.enc1", c1, c0, KERNEL),
        conv("refiner.enc2", c2, c1, KERNEL),
        conv("refiner.enc3", c3, c2, KERNEL),
        conv("refiner.dec2", c2, c3 + c2, KERNEL),
        conv("refiner.dec1", c1, c2 + c1, KERNEL),
        conv("refiner.dec0", c0, c1 + c0, KERNEL),
        conv("refiner.head", 1, c0, 1),
    ]
}

impl ToyWeights {
    /// Deterministic uniform init in `±1/√fan_in`. The FiLM bias starts at
    /// `(γ, β) = (1, 0)` with a small generator weight around it.
    pub fn seeded(seed: u64, embed_dim: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tensors = BTreeMap::new();
        for (name, dims) in layout(embed_dim) {
            let n = NamedTensor::numel(&dims);
            let data = match name.as_str() {
                "film.bias" => vec![1.0, 0.0],
                _ => {
                    let fan_in = match name.as_str() {
                        "film.weight" => dims[1] * 100,
                        n if n.starts_with("attn.") => dims[0],
                        _ => dims[1..].iter().product::<usize>(),
                    };
                    let bound = 1.0 / (fan_in.max(1) as f32).sqrt();
                    (0..n).map(|_| (2.0 * unit(&mut rng) - 1.0) * bound).collect()
                }
            };
            tensors.insert(name.clone(), NamedTensor { name, dims, data });
        }
        Self::from_parts(embed_dim, tensors)
    }

    /// Seeded weights with every refiner kernel zeroed, so Δ vanishes.
    pub fn seeded_zero_refiner(seed: u64, embed_dim: usize) -> Result<Self> {
        let mut w = Self::seeded(seed, embed_dim)?;
        for t in w.tensors.values_mut().filter(|t| t.name.starts_with("refiner.")) {
            t.data.iter_mut().for_each(|x| *x = 0.0);
        }
        Ok(w)
    }

    pub fn zeros(embed_dim: usize) -> Result<Self> {
        let tensors = layout(embed_dim)
            .into_iter()
            .map(|(name, dims)| {
                let data = vec![0.0; NamedTensor::numel(&dims)];
                (name.clone(), NamedTensor { name, dims, data })
            })
            .collect();
        Self::from_parts(embed_dim, tensors)
    }

    fn from_parts(embed_dim: usize, tensors: BTreeMap<String, NamedTensor>) -> Result<Self> {
        let w = Self { embed_dim, tensors };
        w.validate()?;
        Ok(w)
    }

    pub fn get(&self, name: &str) -> Result<&NamedTensor> {
        self.tensors
            .get(name)
            .ok_or_else(|| Error::Format(format!("missing tensor '{name}'")))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut NamedTensor> {
        self.tensors
            .get_mut(name)
            .ok_or_else(|| Error::Format(format!("missing tensor '{name}'")))
    }

    pub fn tensors(&self) -> impl Iterator<Item = &NamedTensor> {
        self.tensors.values()
    }

    /// Every expected tensor present with the right shape, nothing extra,
    /// all values finite.
    pub fn validate(&self) -> Result<()> {
        let expected = layout(self.embed_dim);
        if self.embed_dim == 0 {
            return Err(Error::Format("embedding width must be positive".into()));
        }
        if expected.len() != self.tensors.len() {
            return Err(Error::Format(format!(
                "expected {} tensors, found {}",
                expected.len(),
                self.tensors.len()
            )));
        }
        for (name, dims) in expected {
            let t = self.get(&name)?;
            if t.dims != dims {
                return Err(Error::Format(format!(
                    "tensor '{name}' has shape {:?}, expected {dims:?}",
                    t.dims
                )));
            }
            if t.data.len() != NamedTensor::numel(&dims) {
                return Err(Error::Format(format!("tensor '{name}' data length mismatch")));
            }
            if t.data.iter().any(|x| !x.is_finite()) {
                return Err(Error::Format(format!("tensor '{name}' has non-finite entries")));
            }
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        write_u32(&mut w, self.tensors.len())?;
        for t in self.tensors.values() {
            write_u32(&mut w, t.name.len())?;
            w.write_all(t.name.as_bytes())?;
            write_u32(&mut w, t.dims.len())?;
            for &d in &t.dims {
                write_u32(&mut w, d)?;
            }
            for x in &t.data {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(Error::Format("not a PPSW file (bad magic)".into()));
        }
        let version = cur.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported PPSW version {version}")));
        }
        let count = cur.u32()? as usize;
        let mut tensors = BTreeMap::new();
        for _ in 0..count {
            let len = cur.u32()? as usize;
            let name = std::str::from_utf8(cur.take(len)?)
                .map_err(|_| Error::Format("tensor name is not UTF-8".into()))?
                .to_string();
            let rank = cur.u32()? as usize;
            let dims = (0..rank).map(|_| cur.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let n = NamedTensor::numel(&dims);
            let raw = cur.take(n.checked_mul(4).ok_or_else(|| Error::Format("tensor too large".into()))?)?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            if tensors.contains_key(&name) {
                return Err(Error::Format(format!("duplicate tensor '{name}'")));
            }
            tensors.insert(name.clone(), NamedTensor { name, dims, data });
        }
        if cur.pos != bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after last tensor",
                bytes.len() - cur.pos
            )));
        }
        let embed_dim = tensors
            .get("attn.q")
            .and_then(|t| t.dims.get(1).copied())
            .ok_or_else(|| Error::Format("missing tensor 'attn.q'".into()))?;
        Self::from_parts(embed_dim, tensors)
    }
}

/// Uniform in `[0, 1)` from the top 24 bits of a `u32`.
fn unit(rng: &mut ChaCha8Rng) -> f32 {
    (rng.next_u32() >> 8) as f32 / (1u32 << 24) as f32
}

fn write_u32<W: Write>(w: &mut W, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Format(format!("{v} does not fit in u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Format(format!("truncated PPSW data at byte {}", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}
