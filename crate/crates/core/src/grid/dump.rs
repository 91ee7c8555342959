//! Binary field dump ("SBPF").
//!
//! Layout, all little-endian: magic `SBPF`, u32 version (= 1), u32 n per axis,
//! f64 period length, f64 epsilon (0 when not applicable), then n³ f64 values
//! in x-fastest order.

use std::io::{Read, Write};

use super::{ScalarField, TorusGrid};
use crate::error::{Error, Result};

pub const SBPF_MAGIC: [u8; 4] = *b"SBPF";
pub const SBPF_VERSION: u32 = 1;

/// A field read back from a dump, with the epsilon recorded alongside it.
#[derive(Debug, Clone)]
pub struct FieldDump {
    pub field: ScalarField,
    pub epsilon: f64,
}

pub fn write_field<W: Write>(mut w: W, field: &ScalarField, epsilon: f64) -> Result<()> {
    let grid = field.grid();
    w.write_all(&SBPF_MAGIC)?;
    w.write_all(&SBPF_VERSION.to_le_bytes())?;
    w.write_all(&(grid.n_per_axis() as u32).to_le_bytes())?;
    w.write_all(&grid.period_length().to_le_bytes())?;
    w.write_all(&epsilon.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * field.values().len());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Read a dump. A grid with matching shape is reused when supplied, so the
/// transform plans are shared.
pub fn read_field<R: Read>(mut r: R, grid: Option<&TorusGrid>) -> Result<FieldDump> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != SBPF_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != SBPF_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = read_u32(&mut r)? as usize;
    let length = read_f64(&mut r)?;
    let epsilon = read_f64(&mut r)?;
    let grid = match grid {
        Some(g) if g.n_per_axis() == n && g.period_length() == length => g.clone(),
        _ => TorusGrid::new(n, length)?,
    };
    let mut bytes = vec![0u8; 8 * grid.len()];
    r.read_exact(&mut bytes)?;
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(FieldDump {
        field: ScalarField::new(&grid, values)?,
        epsilon,
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
