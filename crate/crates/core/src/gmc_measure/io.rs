//! Binary (`LQGM`) and CSV serialisation of cell measures.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid_field::io::{read_f64, read_u32};
use crate::grid_field::{DomainSpec, Shape};

use super::{CellMeasure, LineMeasure};

pub const MEASURE_MAGIC: &[u8; 4] = b"LQGM";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_measure_binary(m: &CellMeasure, w: &mut impl Write) -> Result<()> {
    w.write_all(MEASURE_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(m.cells_x() as u32).to_le_bytes())?;
    w.write_all(&(m.cells_y() as u32).to_le_bytes())?;
    w.write_all(&m.gamma().to_le_bytes())?;
    w.write_all(&m.eps().to_le_bytes())?;
    for v in m.masses() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads an `LQGM` stream; the domain shape is supplied by the caller.
pub fn read_measure_binary(r: &mut impl Read, shape: Shape) -> Result<CellMeasure> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MEASURE_MAGIC {
        return Err(Error::Format("not an LQGM measure file".into()));
    }
    let version = read_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported LQGM version {version}")));
    }
    let nx = read_u32(r)?;
    let ny = read_u32(r)?;
    let gamma = read_f64(r)?;
    let eps = read_f64(r)?;
    let n = match shape {
        Shape::UnitSquare if nx == ny => nx,
        Shape::UnitDisk if nx == ny && nx % 2 == 0 => nx / 2,
        _ => return Err(Error::Format(format!("{nx}x{ny} cells do not fit a {shape} lattice"))),
    };
    let domain = DomainSpec::with_default_boundary(shape, n)?;
    let mut mass = Vec::with_capacity((nx * ny) as usize);
    for _ in 0..(nx * ny) {
        mass.push(read_f64(r)?);
    }
    CellMeasure::from_masses(domain, eps, gamma, mass)
}

pub fn save_measure(m: &CellMeasure, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_measure_binary(m, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_measure(path: &Path, shape: Shape) -> Result<CellMeasure> {
    read_measure_binary(&mut BufReader::new(File::open(path)?), shape)
}

/// CSV with header `ix,iy,mass`, one row per cell.
pub fn write_measure_csv(m: &CellMeasure, w: &mut impl Write) -> Result<()> {
    writeln!(w, "ix,iy,mass")?;
    for cj in 0..m.cells_y() {
        for ci in 0..m.cells_x() {
            writeln!(w, "{ci},{cj},{}", m.mass(ci, cj))?;
        }
    }
    Ok(())
}

/// CSV with header `bin,x,mass`.
pub fn write_line_measure_csv(m: &LineMeasure, w: &mut impl Write) -> Result<()> {
    writeln!(w, "bin,x,mass")?;
    for (k, v) in m.masses().iter().enumerate() {
        writeln!(w, "{k},{},{v}", m.bin_center(k))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmc_measure::build_liouville_measure;
    use crate::grid_field::sample_gff;

    #[test]
    fn round_trip() {
        let d = DomainSpec::disk(8).unwrap();
        let f = sample_gff(d, 1).unwrap();
        let m = build_liouville_measure(&f, 0.5, 0.25).unwrap();
        let mut buf = Vec::new();
        write_measure_binary(&m, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 8 + 16 + 8 * 16 * 16);
        let back = read_measure_binary(&mut buf.as_slice(), Shape::UnitDisk).unwrap();
        assert_eq!(back, m);
        let mut csv = Vec::new();
        write_measure_csv(&m, &mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("ix,iy,mass\n"));
    }
}
