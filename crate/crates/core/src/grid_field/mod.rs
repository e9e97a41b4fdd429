//! Lattice domains and discrete Gaussian free fields.

mod circle;
mod decompose;
mod domain;
mod field;
mod green;
mod inner;
pub mod io;
pub mod multigrid;
mod sample;
pub mod spectral;

pub use circle::{
    ball_inside, bilinear_weights, check_scale, circle_average, circle_offsets, circle_point_count,
    circle_stencil, circle_variance, circle_weights, log_calibration, semicircle_average,
    semicircle_offsets, semicircle_point_count, semicircle_weights, truncated_circle_average,
    truncated_semicircle_average,
};
pub use decompose::{harmonic_decompose, harmonic_oscillation, BallDecomposition};
pub use domain::{BoundaryCondition, DomainSpec, Lattice, Point, Shape};
pub use field::FieldGrid;
pub use green::{green_table, GreenTable, DENSE_LIMIT};
pub use inner::dirichlet_inner;
pub use sample::{reflect_to_upper, sample_gff, GffSampler};
