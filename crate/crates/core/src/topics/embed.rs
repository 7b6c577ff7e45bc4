use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EMB1";
pub const HEADER_LEN: usize = 16;

/// Row-major review embeddings with aligned review ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub n_rows: usize,
    pub dim: usize,
    pub data: Vec<f32>,
    pub review_ids: Vec<String>,
}

impl EmbeddingMatrix {
    pub fn new(dim: usize, data: Vec<f32>, review_ids: Vec<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("embedding dimension must be positive".into()));
        }
        if data.len() != dim * review_ids.len() {
            return Err(Error::Shape(format!(
                "{} values for {} rows of width {dim}",
                data.len(),
                review_ids.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("embedding row {}", pos / dim)));
        }
        Ok(EmbeddingMatrix {
            n_rows: review_ids.len(),
            dim,
            data,
            review_ids,
        })
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Rows reordered to follow `ids`; every id must be present.
    pub fn aligned_to(&self, ids: &[String]) -> Result<EmbeddingMatrix> {
        let lookup: HashMap<&str, usize> = self.review_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut data = Vec::with_capacity(ids.len() * self.dim);
        for id in ids {
            let &row = lookup
                .get(id.as_str())
                .ok_or_else(|| Error::Unknown { kind: "review id", id: id.clone() })?;
            data.extend_from_slice(self.row(row));
        }
        EmbeddingMatrix::new(self.dim, data, ids.to_vec())
    }

    /// Little-endian `EMB1` payload plus the `row,review_id` sidecar CSV.
    pub fn save(&self, matrix_path: &Path, index_path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&(self.n_rows as u32).to_le_bytes());
        bytes.extend_from_slice(&(self.dim as u32).to_le_bytes());
        bytes.extend_from_slice(&0u32.to_le_bytes());
        for v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let mut f = std::fs::File::create(matrix_path).map_err(|e| Error::io(matrix_path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(matrix_path, e))?;

        let mut w = csv::Writer::from_path(index_path)?;
        w.write_record(["row", "review_id"])?;
        for (i, id) in self.review_ids.iter().enumerate() {
            w.write_record([i.to_string().as_str(), id])?;
        }
        w.flush().map_err(|e| Error::io(index_path, e))
    }
}

pub fn load_embeddings(matrix_path: &Path, index_path: &Path) -> Result<EmbeddingMatrix> {
    let mut bytes = Vec::new();
    std::fs::File::open(matrix_path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(matrix_path, e))?;
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::format(matrix_path, "missing EMB1 header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (n_rows, dim) = (word(4), word(8));
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != n_rows * dim * 4 {
        return Err(Error::Shape(format!(
            "header declares {n_rows}x{dim} but payload holds {} bytes",
            payload.len()
        )));
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let mut reader = csv::Reader::from_path(index_path)?;
    let mut ids = vec![None; n_rows];
    let mut count = 0;
    for rec in reader.records() {
        let rec = rec?;
        count += 1;
        let row: usize = rec
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::format(index_path, "bad row column"))?;
        if row >= n_rows || ids[row].is_some() {
            return Err(Error::Shape(format!(
                "index has {count}+ rows or duplicate row {row} for {n_rows} embeddings"
            )));
        }
        ids[row] = Some(rec.get(1).unwrap_or_default().to_string());
    }
    if count != n_rows {
        return Err(Error::Shape(format!("index has {count} rows for {n_rows} embeddings")));
    }
    let ids = ids.into_iter().map(Option::unwrap).collect();
    EmbeddingMatrix::new(dim, data, ids)
}
