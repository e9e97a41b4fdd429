//! Liouville area and boundary measures and exponent calculators.

mod boundary;
mod frostman;
pub mod io;
mod kpz;
mod liouville;

pub use boundary::{build_boundary_measure, diameter_averages, LineMeasure};
pub use frostman::{frostman_energy, MassAtoms};
pub use kpz::{kpz_exponents, ExponentTriple, KpzInput};
pub use liouville::{
    build_liouville_measure, build_liouville_measure_in, cell_circle_averages, CellMeasure,
    CellRegion,
};

use crate::error::{Error, Result};

/// Checks that `eps = 2^-k` exactly and `eps >= 2/n`; returns `k`.
pub fn dyadic_level(eps: f64, n: u32) -> Result<i32> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Parameter(format!("scale {eps} is not positive")));
    }
    let k = -eps.log2().round() as i32;
    if (-(k as f64)).exp2() != eps {
        return Err(Error::Parameter(format!("scale {eps} is not a power of two")));
    }
    if eps < 2.0 / n as f64 {
        return Err(Error::Precondition(format!(
            "scale {eps} is below two lattice spacings at resolution {n}"
        )));
    }
    Ok(k)
}

/// Rejects `γ` outside `[0, 2)`.
pub fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && (0.0..2.0).contains(&gamma)) {
        return Err(Error::Parameter(format!("gamma {gamma} outside [0, 2)")));
    }
    Ok(())
}
