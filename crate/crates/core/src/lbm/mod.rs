//! Brownian paths, the quantum clock, Liouville Brownian motion and harmonic
//! measure off the Brownian range.

mod clock;
mod extension;
mod harmonic;
pub mod io;
mod path;

pub use clock::{
    lbm_trajectory, occupation_by_cells, occupation_quantum_measure, quantum_clock,
    quantum_clock_from_averages, LbmTrajectory, QuantumClock,
};
pub use extension::{
    harmonic_extension_estimator, harmonic_extension_true, ExtensionEstimate, ExtensionWindows,
};
pub use harmonic::{
    choose_viewpoint, harmonic_measure, harmonic_measure_polyline, HarmonicMeasureSample, HitCell,
    RangeIndex,
};
pub use path::{default_dt, sample_brownian_path, sample_brownian_path_until, BrownianPath, ExitKind, SUBDOMAIN_RADIUS};
