//! Corpora, precomputed embeddings and synthetic Gaussian mixtures.
//!
//! A dataset row `i` is both the embedding of `records[i]` and the record
//! itself: index alignment is the text/point mapping in both directions.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const EMBEDDING_MAGIC: &[u8; 4] = b"EMB1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextRecord {
    pub id: usize,
    pub text: String,
    pub label: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDataset {
    dim: usize,
    points: Vec<f64>,
    records: Vec<TextRecord>,
}

impl EmbeddedDataset {
    /// Validates and aligns records with a row-major `records.len() x dim` matrix.
    pub fn new(records: Vec<TextRecord>, dim: usize, points: Vec<f64>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !points.len().is_multiple_of(dim) {
            return Err(Error::Malformed(format!(
                "{} values do not form rows of width {dim}",
                points.len()
            )));
        }
        let rows = points.len() / dim;
        if rows != records.len() {
            return Err(Error::CountMismatch {
                corpus: records.len(),
                embeddings: rows,
            });
        }
        for (i, rec) in records.iter().enumerate() {
            if rec.id != i {
                return Err(Error::Malformed(format!(
                    "record ids must be dense 0..n-1; position {i} has id {}",
                    rec.id
                )));
            }
        }
        let labelled = records.iter().filter(|r| r.label.is_some()).count();
        if labelled != 0 && labelled != records.len() {
            return Err(Error::Malformed(format!(
                "labels must be present for all records or none ({labelled} of {})",
                records.len()
            )));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self {
            dim,
            points,
            records,
        })
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn record(&self, i: usize) -> &TextRecord {
        &self.records[i]
    }

    pub fn records(&self) -> &[TextRecord] {
        &self.records
    }

    /// Text for a point index.
    pub fn text_of(&self, i: usize) -> &str {
        &self.records[i].text
    }

    /// Point index for a record id. Ids are dense, so this is the identity
    /// after a bounds check.
    pub fn index_of(&self, id: usize) -> Option<usize> {
        (id < self.n()).then_some(id)
    }

    /// Ground-truth labels when every record carries one.
    pub fn labels(&self) -> Option<Vec<i64>> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// Squared diagonal of the axis-aligned bounding box.
    pub fn bbox_diag_sq(&self) -> f64 {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for row in self.rows() {
            for d in 0..self.dim {
                lo[d] = lo[d].min(row[d]);
                hi[d] = hi[d].max(row[d]);
            }
        }
        lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum()
    }
}

/// Reads a JSONL corpus, one `{"id", "text", "label"}` object per line.
pub fn read_corpus(path: &Path) -> Result<Vec<TextRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TextRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Malformed(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_corpus(path: &Path, records: &[TextRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for rec in records {
        serde_json::to_writer(&mut w, rec)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Decodes the `EMB1` binary layout: magic, u32 LE rows, u32 LE dim, then
/// `rows * dim` f32 LE values row-major.
pub fn decode_embeddings(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    if bytes.len() < 12 || &bytes[..4] != EMBEDDING_MAGIC {
        return Err(Error::Malformed("missing EMB1 header".into()));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = rows
        .checked_mul(dim)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| Error::Malformed("header sizes overflow".into()))?;
    let body = &bytes[12..];
    if body.len() != expected {
        return Err(Error::Malformed(format!(
            "header declares {rows}x{dim} ({expected} bytes) but body has {} bytes",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok((rows, dim, values))
}

pub fn encode_embeddings(rows: usize, dim: usize, values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + values.len() * 4);
    out.extend_from_slice(EMBEDDING_MAGIC);
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    for v in values {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn read_embeddings(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_embeddings(&bytes)
}

pub fn write_embeddings(path: &Path, data: &EmbeddedDataset) -> Result<()> {
    std::fs::write(path, encode_embeddings(data.n(), data.dim(), data.points()))
        .map_err(|e| Error::io(path, e))
}

pub fn load_dataset(corpus_path: &Path, embedding_path: &Path) -> Result<EmbeddedDataset> {
    let records = read_corpus(corpus_path)?;
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (rows, dim, values) = read_embeddings(embedding_path)?;
    if rows != records.len() {
        return Err(Error::CountMismatch {
            corpus: records.len(),
            embeddings: rows,
        });
    }
    EmbeddedDataset::new(records, dim, values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub k_true: usize,
    pub n: usize,
    pub dim: usize,
    /// Minimum distance between blob centers, in component standard deviations.
    pub separation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k_true < 2 {
            return Err(Error::InvalidParameter("k_true must be >= 2".into()));
        }
        if !(self.separation > 0.0) || !self.separation.is_finite() {
            return Err(Error::InvalidParameter("separation must be > 0".into()));
        }
        if self.n == 0 || self.dim == 0 {
            return Err(Error::InvalidParameter("n and dim must be >= 1".into()));
        }
        Ok(())
    }
}

/// Isotropic unit-variance Gaussian blobs with balanced sizes.
///
/// When `k_true <= dim` the centers sit on scaled coordinate axes, so every
/// pair is exactly `separation` apart. Otherwise they are rejection-sampled in
/// a box that grows until the spacing constraint can be met.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<EmbeddedDataset> {
    spec.validate()?;
    let mut rng = rng::rng_from(spec.seed);
    let (k, dim) = (spec.k_true, spec.dim);

    let centers: Vec<Vec<f64>> = if k <= dim {
        let scale = spec.separation / std::f64::consts::SQRT_2;
        (0..k)
            .map(|i| {
                let mut c = vec![0.0; dim];
                c[i] = scale;
                c
            })
            .collect()
    } else {
        let mut side = spec.separation * (k as f64).powf(1.0 / dim as f64) * 2.0;
        loop {
            let mut chosen: Vec<Vec<f64>> = Vec::with_capacity(k);
            let mut attempts = 0;
            while chosen.len() < k && attempts < 10_000 {
                attempts += 1;
                let c: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * side).collect();
                let ok = chosen
                    .iter()
                    .all(|o| crate::geometry::sq_dist(o, &c) >= spec.separation * spec.separation);
                if ok {
                    chosen.push(c);
                }
            }
            if chosen.len() == k {
                break chosen;
            }
            side *= 1.5;
        }
    };

    let mut labels: Vec<usize> = (0..spec.n).map(|i| i % k).collect();
    labels.shuffle(&mut rng);

    let mut points = Vec::with_capacity(spec.n * dim);
    for &lab in &labels {
        for d in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            // f32-representable so the in-memory dataset equals its EMB1 round trip
            points.push((centers[lab][d] + z) as f32 as f64);
        }
    }
    let records = labels
        .iter()
        .enumerate()
        .map(|(i, &lab)| TextRecord {
            id: i,
            text: format!("synthetic item {i}"),
            label: Some(lab as i64),
        })
        .collect();
    EmbeddedDataset::new(records, dim, points)
}
