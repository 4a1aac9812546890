//! Field serialization.
//!
//! CSV: header `u,v,value` for one component, `u,v,value0,value1,...`
//! otherwise; one row per node in storage order (`u` outer, `v` inner).
//!
//! Binary (`.gdf`), all little-endian:
//!
//! | offset | size | content                              |
//! |--------|------|--------------------------------------|
//! | 0      | 4    | magic `GDF1`                         |
//! | 4      | 4    | `nu` (u32)                           |
//! | 8      | 4    | `nv` (u32)                           |
//! | 12     | 4    | component count `c` (u32)            |
//! | 16     | 16   | reserved, zero                       |
//! | 32     | 32   | bounds `u0, u1, v0, v1` (f64)        |
//! | 64     | ...  | `nu * nv * c` f64, node-major, components interleaved |

use std::io::{Read, Write};
use std::path::Path;

use super::grid::{Grid2, ScalarField};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"GDF1";
pub const HEADER_LEN: usize = 32;

/// A multi-component field as written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBlock {
    pub grid: Grid2,
    pub components: Vec<ScalarField>,
}

impl FieldBlock {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let grid = components
            .first()
            .ok_or_else(|| Error::ShapeMismatch("empty field block".into()))?
            .grid;
        for c in &components {
            if c.grid != grid {
                return Err(Error::ShapeMismatch("components on different grids".into()));
            }
        }
        Ok(FieldBlock { grid, components })
    }
}

pub fn write_csv(block: &FieldBlock, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(block, file).map_err(|e| Error::io(path, e))
}

pub fn write_csv_to(block: &FieldBlock, w: impl Write) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["u".to_string(), "v".to_string()];
    if block.components.len() == 1 {
        header.push("value".into());
    } else {
        header.extend((0..block.components.len()).map(|c| format!("value{c}")));
    }
    out.write_record(&header)?;
    let g = block.grid;
    for i in 0..g.nu {
        for j in 0..g.nv {
            let mut row = vec![g.u(i).to_string(), g.v(j).to_string()];
            row.extend(block.components.iter().map(|c| c.at(i, j).to_string()));
            out.write_record(&row)?;
        }
    }
    out.flush()
}

pub fn write_binary(block: &FieldBlock, path: &Path) -> Result<()> {
    let mut bytes = Vec::new();
    encode_binary(block, &mut bytes);
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_binary(block: &FieldBlock, out: &mut Vec<u8>) {
    let g = block.grid;
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.nu as u32).to_le_bytes());
    out.extend_from_slice(&(g.nv as u32).to_le_bytes());
    out.extend_from_slice(&(block.components.len() as u32).to_le_bytes());
    out.extend_from_slice(&[0u8; 16]);
    for x in [g.u0, g.u1, g.v0, g.v1] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for k in 0..g.len() {
        for c in &block.components {
            out.extend_from_slice(&c.data[k].to_le_bytes());
        }
    }
}

pub fn read_binary(path: &Path) -> Result<FieldBlock> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_binary(&bytes).map_err(|msg| Error::Parse {
        path: path.to_path_buf(),
        msg,
    })
}

pub fn decode_binary(bytes: &[u8]) -> std::result::Result<FieldBlock, String> {
    if bytes.len() < HEADER_LEN + 32 || &bytes[0..4] != MAGIC {
        return Err("missing GDF1 header".into());
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (nu, nv, nc) = (u32_at(4), u32_at(8), u32_at(12));
    let bounds: Vec<f64> = (0..4).map(|k| f64_at(HEADER_LEN + 8 * k)).collect();
    let grid = Grid2::new(bounds[0], bounds[1], nu, bounds[2], bounds[3], nv)
        .map_err(|e| e.to_string())?;
    let body = HEADER_LEN + 32;
    if nc == 0 || bytes.len() != body + 8 * nu * nv * nc {
        return Err(format!(
            "payload is {} bytes, expected {}",
            bytes.len() - body,
            8 * nu * nv * nc
        ));
    }
    let mut comps = vec![ScalarField::zeros(grid); nc];
    for k in 0..nu * nv {
        for (c, comp) in comps.iter_mut().enumerate() {
            comp.data[k] = f64_at(body + 8 * (k * nc + c));
        }
    }
    Ok(FieldBlock {
        grid,
        components: comps,
    })
}
