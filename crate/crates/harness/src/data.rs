//! Image datasets: IDX loading (optionally gzipped) and synthetic binary glyphs.

use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};
use sparsegen::SeededRng;

use crate::error::{HarnessError, Result};

pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const SIDE: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub images: Vec<Vec<f64>>,
    pub domain: Domain,
    pub rows: usize,
    pub cols: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    /// Thresholds at 0.5: values `>= 0.5` become 1.
    pub fn binarize(mut self) -> Self {
        for img in &mut self.images {
            binarize_in_place(img);
        }
        self.domain = Domain::Binary;
        self
    }

    /// Keeps images `start..start + count` (clamped to the dataset).
    pub fn slice(&self, start: usize, count: usize) -> Self {
        let end = (start + count).min(self.len());
        Self {
            images: self.images[start.min(end)..end].to_vec(),
            ..self.clone()
        }
    }

    /// Row-major matrix with one image per row.
    pub fn to_matrix(&self) -> Result<sparsegen::Matrix> {
        let data = self.images.concat();
        Ok(sparsegen::Matrix::from_vec(self.len(), self.pixels(), data)?)
    }
}

pub fn binarize_in_place(img: &mut [f64]) {
    img.iter_mut().for_each(|p| *p = if *p >= 0.5 { 1.0 } else { 0.0 });
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(HarnessError::IdxTruncated {
            needed: at + 4,
            available: bytes.len(),
        })
}

/// Parses an uncompressed IDX image tensor, scaling pixels by 1/255.
pub fn parse_idx(name: &str, bytes: &[u8]) -> Result<Dataset> {
    let magic = be_u32(bytes, 0)?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(HarnessError::IdxMagic { found: magic });
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    if rows == 0 || cols == 0 {
        return Err(HarnessError::IdxDims(format!("image size {rows}x{cols}")));
    }
    let pixels = rows * cols;
    let needed = 16 + count * pixels;
    if bytes.len() < needed {
        return Err(HarnessError::IdxTruncated {
            needed,
            available: bytes.len(),
        });
    }
    if bytes.len() > needed {
        return Err(HarnessError::IdxDims(format!(
            "header declares {count} images of {rows}x{cols} but payload has {} extra bytes",
            bytes.len() - needed
        )));
    }
    let images = bytes[16..]
        .chunks_exact(pixels)
        .map(|c| c.iter().map(|&p| p as f64 / 255.0).collect())
        .collect();
    Ok(Dataset {
        name: name.to_string(),
        images,
        domain: Domain::Continuous,
        rows,
        cols,
    })
}

/// Loads an IDX image file; gzip-compressed files are detected and inflated.
pub fn load_idx(path: impl AsRef<Path>, binarize: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let raw = std::fs::read(path)?;
    let bytes = if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        out
    } else {
        raw
    };
    let name = path
        .file_name()
        .and_then(|s| s.to_str())
        .map(|s| s.split('-').next().unwrap_or(s))
        .unwrap_or("idx");
    let ds = parse_idx(name, &bytes)?;
    Ok(if binarize { ds.binarize() } else { ds })
}

/// Binary 28x28 images of one to three pen strokes, a stand-in for
/// handwritten characters from many alphabets.
///
/// Each stroke is a short random walk with smoothly turning heading, drawn
/// with a round brush.
pub fn synthetic_glyphs(count: usize, seed: u64) -> Dataset {
    let root = SeededRng::with_stream(seed, 0x6c79);
    let images = (0..count)
        .map(|i| {
            let mut rng = root.split(i as u64);
            let mut img = vec![0.0; SIDE * SIDE];
            let strokes = 1 + rng.below(3);
            for _ in 0..strokes {
                let mut p = (5.0 + 18.0 * rng.uniform(), 5.0 + 18.0 * rng.uniform());
                let mut heading = std::f64::consts::TAU * rng.uniform();
                let turn = 0.6 * rng.normal();
                let points = 3 + rng.below(4);
                let brush = 0.9 + 0.6 * rng.uniform();
                for _ in 1..points {
                    let len = 3.0 + 4.0 * rng.uniform();
                    let q = (
                        (p.0 + len * heading.cos()).clamp(3.0, 24.0),
                        (p.1 + len * heading.sin()).clamp(3.0, 24.0),
                    );
                    stamp_segment(&mut img, p, q, brush);
                    p = q;
                    heading += turn + 0.4 * rng.normal();
                }
            }
            img
        })
        .collect();
    Dataset {
        name: "glyphs".into(),
        images,
        domain: Domain::Binary,
        rows: SIDE,
        cols: SIDE,
    }
}

fn stamp_segment(img: &mut [f64], a: (f64, f64), b: (f64, f64), radius: f64) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    for r in 0..SIDE {
        for c in 0..SIDE {
            let (px, py) = (c as f64, r as f64);
            let t = if len2 > 0.0 {
                (((px - a.0) * dx + (py - a.1) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let (qx, qy) = (a.0 + t * dx - px, a.1 + t * dy - py);
            if qx * qx + qy * qy <= radius * radius {
                img[r * SIDE + c] = 1.0;
            }
        }
    }
}
