use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::TokenOccurrence;
use crate::error::{Error, Result};

pub const LCE_MAGIC: &[u8; 4] = b"LCE1";
/// magic + layer + N + D + dtype + 3 reserved bytes
pub const LCE_HEADER_LEN: usize = 20;
const DTYPE_F32: u8 = 0;

/// Row-major `n_rows x dim` float32 matrix for one layer. Row `i` belongs to
/// occurrence `i`. Layer 0 is the embedding layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerEmbeddings {
    layer: u32,
    n_rows: usize,
    dim: usize,
    data: Vec<f32>,
}

impl LayerEmbeddings {
    pub fn new(layer: u32, n_rows: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != n_rows * dim {
            return Err(Error::InvalidEmbeddings(format!(
                "payload has {} values, expected {n_rows} x {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self {
            layer,
            n_rows,
            dim,
            data,
        })
    }

    pub fn from_rows(layer: u32, rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidEmbeddings("ragged rows".into()));
        }
        Self::new(layer, rows.len(), dim, rows.concat())
    }

    pub fn layer(&self) -> u32 {
        self.layer
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        // chunks_exact(0) panics
        self.data.chunks_exact(self.dim.max(1)).take(self.n_rows)
    }

    /// Copies the selected rows, in order, into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> LayerEmbeddings {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        LayerEmbeddings {
            layer: self.layer,
            n_rows: idx.len(),
            dim: self.dim,
            data,
        }
    }
}

pub fn write_lce(path: &Path, emb: &LayerEmbeddings) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut header = [0u8; LCE_HEADER_LEN];
    header[..4].copy_from_slice(LCE_MAGIC);
    header[4..8].copy_from_slice(&emb.layer.to_le_bytes());
    header[8..12].copy_from_slice(&to_u32(emb.n_rows)?.to_le_bytes());
    header[12..16].copy_from_slice(&to_u32(emb.dim)?.to_le_bytes());
    header[16] = DTYPE_F32;
    w.write_all(&header).map_err(|e| Error::io(path, e))?;
    for v in &emb.data {
        w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn to_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::InvalidEmbeddings(format!("{v} does not fit in u32")))
}

/// Reads an LCE file without checking it against an occurrence set.
pub fn read_lce(path: &Path) -> Result<LayerEmbeddings> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    parse_lce(&bytes)
}

fn parse_lce(bytes: &[u8]) -> Result<LayerEmbeddings> {
    if bytes.len() < LCE_HEADER_LEN {
        return Err(Error::InvalidEmbeddings(format!(
            "truncated header: {} bytes",
            bytes.len()
        )));
    }
    if &bytes[..4] != LCE_MAGIC {
        return Err(Error::InvalidEmbeddings(format!(
            "bad magic {:?}",
            String::from_utf8_lossy(&bytes[..4])
        )));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let layer = word(4);
    let n = word(8) as usize;
    let d = word(12) as usize;
    if bytes[16] != DTYPE_F32 {
        return Err(Error::InvalidEmbeddings(format!("unsupported dtype code {}", bytes[16])));
    }
    if bytes[17..20] != [0, 0, 0] {
        return Err(Error::InvalidEmbeddings("reserved header bytes are not zero".into()));
    }
    let expected = n
        .checked_mul(d)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| Error::InvalidEmbeddings("header dimensions overflow".into()))?;
    let payload = &bytes[LCE_HEADER_LEN..];
    if payload.len() < expected {
        return Err(Error::InvalidEmbeddings(format!(
            "truncated payload: {} of {expected} bytes",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(Error::InvalidEmbeddings(format!(
            "{} trailing bytes after payload",
            payload.len() - expected
        )));
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    LayerEmbeddings::new(layer, n, d, data)
}

/// Loads an LCE file whose row count must equal `occurrences.len()`.
pub fn load_embeddings(path: &Path, occurrences: &[TokenOccurrence]) -> Result<LayerEmbeddings> {
    let emb = read_lce(path)?;
    if emb.n_rows != occurrences.len() {
        return Err(Error::SizeMismatch {
            expected: occurrences.len(),
            found: emb.n_rows,
        });
    }
    Ok(emb)
}
