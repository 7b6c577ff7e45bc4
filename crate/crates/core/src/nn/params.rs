use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use super::Matrix;
use crate::rng::RngStream;
use crate::{Error, Result};

/// Named parameter tensors. Iteration order is the sorted name order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    tensors: BTreeMap<String, Matrix>,
}

/// Gradient buffers keyed like the [`ParamStore`] they belong to.
pub type GradStore = ParamStore;

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Matrix) -> Result<()> {
        let name = name.into();
        if self.tensors.contains_key(&name) {
            return Err(Error::InvalidArgument(format!("duplicate parameter {name}")));
        }
        self.tensors.insert(name, value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Matrix> {
        self.tensors.get(name).ok_or_else(|| Error::Unknown {
            kind: "parameter",
            id: name.to_string(),
        })
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Matrix> {
        self.tensors.get_mut(name).ok_or_else(|| Error::Unknown {
            kind: "parameter",
            id: name.to_string(),
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tensors.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Matrix)> {
        self.tensors.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Matrix)> {
        self.tensors.iter_mut()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.tensors.keys()
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn n_scalars(&self) -> usize {
        self.tensors.values().map(Matrix::len).sum()
    }

    /// Zero-filled store with the same names and shapes.
    pub fn zeros_like(&self) -> ParamStore {
        ParamStore {
            tensors: self
                .tensors
                .iter()
                .map(|(k, v)| (k.clone(), Matrix::zeros(v.rows(), v.cols())))
                .collect(),
        }
    }

    pub fn zero(&mut self) {
        self.tensors.values_mut().for_each(|m| m.fill(0.0));
    }

    /// Adds `alpha * grad` into the named buffer.
    pub fn accumulate(&mut self, name: &str, alpha: f64, grad: &Matrix) -> Result<()> {
        self.get_mut(name)?.axpy_assign(alpha, grad)
    }

    pub fn same_layout(&self, other: &ParamStore) -> bool {
        self.tensors.len() == other.tensors.len()
            && self
                .tensors
                .iter()
                .zip(&other.tensors)
                .all(|((a, x), (b, y))| a == b && x.shape() == y.shape())
    }

    /// Little-endian blob: per tensor a `PAR1` tag, u32 rows, u32 cols,
    /// u32 name length, the UTF-8 name, then row-major f64 values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (name, m) in &self.tensors {
            out.extend_from_slice(b"PAR1");
            out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
            out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            for v in m.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<ParamStore> {
        let bad = |why: &str| Error::Shape(format!("parameter blob: {why}"));
        let mut store = ParamStore::new();
        let mut pos = 0;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
            let s = bytes.get(*pos..*pos + n).ok_or_else(|| bad("truncated"))?;
            *pos += n;
            Ok(s)
        };
        while pos < bytes.len() {
            if take(&mut pos, 4)? != b"PAR1" {
                return Err(bad("bad tensor tag"));
            }
            let u = |s: &[u8]| u32::from_le_bytes(s.try_into().unwrap()) as usize;
            let rows = u(take(&mut pos, 4)?);
            let cols = u(take(&mut pos, 4)?);
            let name_len = u(take(&mut pos, 4)?);
            let name = std::str::from_utf8(take(&mut pos, name_len)?)
                .map_err(|_| bad("name is not UTF-8"))?
                .to_string();
            let raw = take(&mut pos, rows * cols * 8)?;
            let data = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            store.insert(name, Matrix::new(rows, cols, data)?)?;
        }
        Ok(store)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<ParamStore> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        ParamStore::from_bytes(&bytes)
    }
}

/// Fan-in scaled uniform (LeCun) initialization: U(-√(3/fan_in), √(3/fan_in)),
/// which gives unit-variance weights scaled by 1/fan_in as SELU expects.
pub fn lecun_uniform(rng: &mut RngStream, out: usize, fan_in: usize) -> Matrix {
    let limit = (3.0 / fan_in.max(1) as f64).sqrt();
    Matrix::from_fn(out, fan_in, |_, _| rng.uniform_range(-limit, limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicate_and_unknown_names() {
        let mut p = ParamStore::new();
        p.insert("w", Matrix::zeros(1, 1)).unwrap();
        assert!(p.insert("w", Matrix::zeros(1, 1)).is_err());
        assert!(p.get("nope").is_err());
    }

    #[test]
    fn lecun_bounds() {
        let mut rng = RngStream::new(0, 1);
        let w = lecun_uniform(&mut rng, 50, 12);
        let limit = (3.0f64 / 12.0).sqrt();
        assert!(w.data().iter().all(|x| x.abs() <= limit));
        let var = w.sum_sq() / w.len() as f64;
        assert!((var - 1.0 / 12.0).abs() < 0.02);
    }

    proptest! {
        #[test]
        fn blob_round_trip(shapes in prop::collection::vec((1usize..5, 1usize..5), 1..5), seed in any::<u64>()) {
            let mut rng = RngStream::new(seed, 0);
            let mut p = ParamStore::new();
            for (i, (r, c)) in shapes.iter().enumerate() {
                p.insert(format!("t{i}.weight"), Matrix::from_fn(*r, *c, |_, _| rng.normal())).unwrap();
            }
            prop_assert_eq!(ParamStore::from_bytes(&p.to_bytes()).unwrap(), p);
        }
    }

    #[test]
    fn truncated_blob_is_rejected() {
        let mut p = ParamStore::new();
        p.insert("w", Matrix::zeros(2, 2)).unwrap();
        let bytes = p.to_bytes();
        assert!(ParamStore::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
