//! Lattice Gaussian free fields, Liouville quantum gravity measures and the
//! estimators that recover a field from its measures.
//!
//! The crate is organised by stage:
//!
//! * [`grid_field`]: lattice domains, discrete GFF sampling, Green's
//!   functions, circle averages and Markov decompositions.
//! * [`gmc_measure`]: Liouville area and boundary length measures, KPZ
//!   exponents and Frostman energies.
//! * [`reconstruct`]: the kernel estimator of the field from its measure and
//!   the residual statistics around it.
//! * [`lbm`]: Brownian paths, the quantum clock, Liouville Brownian motion
//!   and harmonic measure off the Brownian range.
//! * [`stats_harness`]: seeded Monte Carlo ensembles, regressions,
//!   non-intersection exponents and report files.

pub mod error;
pub mod exec;
pub mod fft;
pub mod gmc_measure;
pub mod grid_field;
pub mod lbm;
pub mod reconstruct;
pub mod rng;
pub mod stats_harness;

pub use error::{Error, Result};
pub use exec::ExecutionMode;
pub use grid_field::{BoundaryCondition, DomainSpec, FieldGrid, Lattice, Point, Shape};
