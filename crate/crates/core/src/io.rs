//! Embedding and grid-field files: a JSON header next to a little-endian
//! `f64` payload with the same stem and extension `.bin`. Payloads are
//! row-major over the grid (`i` = x index outermost) with the per-point
//! components interleaved.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::ambient::AmbientModel;
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::surface::TorusGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingHeader {
    pub kind: String,
    pub n: usize,
    #[serde(rename = "N_x")]
    pub nx: usize,
    #[serde(rename = "N_y")]
    pub ny: usize,
    pub winding: Vec<[i64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFieldHeader {
    pub kind: String,
    #[serde(rename = "N_x")]
    pub nx: usize,
    #[serde(rename = "N_y")]
    pub ny: usize,
    pub components: usize,
}

const EMBEDDING_KIND: &str = "embedding";
const GRID_FIELD_KIND: &str = "grid_field";

/// The payload path belonging to a header path.
pub fn payload_path(header: &Path) -> PathBuf {
    header.with_extension("bin")
}

fn write_payload(path: &Path, values: impl Iterator<Item = f64>) -> Result<()> {
    let bytes: Vec<u8> = values.flat_map(f64::to_le_bytes).collect();
    fs::write(path, bytes)?;
    Ok(())
}

fn read_payload(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() != expected * 8 {
        return Err(Error::InvalidArgument(format!(
            "{}: expected {} bytes, found {}",
            path.display(),
            expected * 8,
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn save_embedding(f: &Embedding, path: &Path) -> Result<()> {
    let header = EmbeddingHeader {
        kind: EMBEDDING_KIND.into(),
        n: f.model().half_dim(),
        nx: f.grid().nx(),
        ny: f.grid().ny(),
        winding: f.winding().to_vec(),
    };
    fs::write(path, serde_json::to_string_pretty(&header)?)?;
    write_payload(&payload_path(path), f.lift().iter().copied())
}

pub fn read_embedding_header(path: &Path) -> Result<EmbeddingHeader> {
    let header: EmbeddingHeader = serde_json::from_str(&fs::read_to_string(path)?)?;
    if header.kind != EMBEDDING_KIND {
        return Err(Error::InvalidArgument(format!(
            "{}: kind is {:?}, expected {EMBEDDING_KIND:?}",
            path.display(),
            header.kind
        )));
    }
    Ok(header)
}

/// Loads an embedding into `model`, whose half-dimension must match the header.
pub fn load_embedding(path: &Path, model: Arc<AmbientModel>) -> Result<Embedding> {
    let header = read_embedding_header(path)?;
    if header.n != model.half_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.half_dim(),
            got: header.n,
        });
    }
    let grid = TorusGrid::new(header.nx, header.ny)?;
    let dim = 2 * header.n;
    let values = read_payload(&payload_path(path), header.nx * header.ny * dim)?;
    let lift = Array3::from_shape_vec((header.nx, header.ny, dim), values)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Embedding::new(model, &grid, lift, header.winding)
}

pub fn save_grid_field(grid: &TorusGrid, components: &[Array2<f64>], path: &Path) -> Result<()> {
    for c in components {
        grid.check(c)?;
    }
    let header = GridFieldHeader {
        kind: GRID_FIELD_KIND.into(),
        nx: grid.nx(),
        ny: grid.ny(),
        components: components.len(),
    };
    fs::write(path, serde_json::to_string_pretty(&header)?)?;
    let (nx, ny) = grid.shape();
    let values = (0..nx * ny).flat_map(|k| components.iter().map(move |c| c[[k / ny, k % ny]]));
    write_payload(&payload_path(path), values)
}

pub fn load_grid_field(path: &Path) -> Result<(TorusGrid, Vec<Array2<f64>>)> {
    let header: GridFieldHeader = serde_json::from_str(&fs::read_to_string(path)?)?;
    if header.kind != GRID_FIELD_KIND {
        return Err(Error::InvalidArgument(format!(
            "{}: kind is {:?}, expected {GRID_FIELD_KIND:?}",
            path.display(),
            header.kind
        )));
    }
    let grid = TorusGrid::new(header.nx, header.ny)?;
    let m = header.components;
    let values = read_payload(&payload_path(path), header.nx * header.ny * m)?;
    let ny = header.ny;
    let comps = (0..m)
        .map(|c| Array2::from_shape_fn(grid.shape(), |(i, j)| values[(i * ny + j) * m + c]))
        .collect();
    Ok((grid, comps))
}
