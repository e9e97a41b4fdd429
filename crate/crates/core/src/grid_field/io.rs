//! Binary (`LQGF`) and CSV serialisation of fields.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::domain::{DomainSpec, Shape};
use super::field::FieldGrid;

pub const FIELD_MAGIC: &[u8; 4] = b"LQGF";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_field_binary(field: &FieldGrid, w: &mut impl Write) -> Result<()> {
    let l = field.lattice();
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(l.nx as u32).to_le_bytes())?;
    w.write_all(&(l.ny as u32).to_le_bytes())?;
    w.write_all(&field.gamma().unwrap_or(f64::NAN).to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn save_field(field: &FieldGrid, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field_binary(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub(crate) fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Resolution of a `shape` lattice with `nx × ny` nodes.
fn resolution_for(shape: Shape, nx: u32, ny: u32) -> Result<u32> {
    let n = match shape {
        Shape::UnitSquare if nx == ny => nx.checked_sub(1),
        Shape::UnitDisk if nx == ny && nx % 2 == 1 => Some(nx / 2),
        Shape::UpperUnitDisk if nx % 2 == 1 && ny == nx / 2 + 1 => Some(nx / 2),
        _ => None,
    };
    n.ok_or_else(|| Error::Format(format!("{nx}x{ny} grid does not fit a {shape} lattice")))
}

/// Reads an `LQGF` stream. Grid dimensions alone do not identify the
/// domain (a square of resolution `2n` and a disk of resolution `n` share
/// them), so the shape is supplied by the caller.
pub fn read_field_binary(r: &mut impl Read, shape: Shape) -> Result<FieldGrid> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Format("not an LQGF field file".into()));
    }
    let version = read_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported LQGF version {version}")));
    }
    let nx = read_u32(r)?;
    let ny = read_u32(r)?;
    let gamma = read_f64(r)?;
    let n = resolution_for(shape, nx, ny)?;
    let domain = DomainSpec::with_default_boundary(shape, n)?;
    let mut values = Vec::with_capacity(nx as usize * ny as usize);
    for _ in 0..nx as usize * ny as usize {
        values.push(read_f64(r)?);
    }
    Ok(FieldGrid::from_values(domain, values)?.with_gamma((!gamma.is_nan()).then_some(gamma)))
}

pub fn load_field(path: &Path, shape: Shape) -> Result<FieldGrid> {
    read_field_binary(&mut BufReader::new(File::open(path)?), shape)
}

/// CSV with header `ix,iy,x,y,value`, one row per node.
pub fn write_field_csv(field: &FieldGrid, w: &mut impl Write) -> Result<()> {
    let l = field.lattice();
    writeln!(w, "ix,iy,x,y,value")?;
    for j in 0..l.ny {
        for i in 0..l.nx {
            let p = l.node_pos(i, j);
            writeln!(w, "{i},{j},{},{},{}", p.x, p.y, field.at(i, j))?;
        }
    }
    Ok(())
}
