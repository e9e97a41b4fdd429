//! CSV dumps of paths and harmonic-measure samples.

use std::io::Write;

use crate::error::{Error, Result};

use super::clock::QuantumClock;
use super::harmonic::HarmonicMeasureSample;
use super::path::BrownianPath;

/// Writes `t,x,y,phi` rows; `phi` is empty without a clock.
pub fn write_path_csv(path: &BrownianPath, clock: Option<&QuantumClock>, w: &mut impl Write) -> Result<()> {
    if let Some(c) = clock {
        if c.phi().len() != path.len() {
            return Err(Error::Config("clock does not belong to the path".into()));
        }
    }
    writeln!(w, "t,x,y,phi")?;
    for (k, (t, p)) in path.times().iter().zip(path.positions()).enumerate() {
        match clock {
            Some(c) => writeln!(w, "{t},{},{},{}", p.x, p.y, c.phi()[k])?,
            None => writeln!(w, "{t},{},{},", p.x, p.y)?,
        }
    }
    Ok(())
}

pub fn write_harmonic_measure_csv(sample: &HarmonicMeasureSample, w: &mut impl Write) -> Result<()> {
    writeln!(w, "cell_ix,cell_iy,weight,is_boundary")?;
    for c in sample.cells() {
        writeln!(w, "{},{},{},{}", c.ci, c.cj, c.weight, c.is_boundary as u8)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_field::{DomainSpec, FieldGrid};
    use crate::lbm::{default_dt, quantum_clock, sample_brownian_path};

    #[test]
    fn path_csv_has_one_row_per_timestamp() {
        let d = DomainSpec::disk(16).unwrap();
        let path = sample_brownian_path(&d, default_dt(16), 4).unwrap();
        let clock = quantum_clock(&path, &FieldGrid::zeros(d), 0.5, 0.125).unwrap();
        let mut buf = Vec::new();
        write_path_csv(&path, Some(&clock), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,y,phi\n0,0,0,0\n"));
        assert_eq!(text.lines().count(), path.len() + 1);
    }
}
