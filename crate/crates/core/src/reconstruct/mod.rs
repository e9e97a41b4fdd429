//! Recovery of the field from its Liouville measures.

mod estimator;
mod kernel;
mod pairing;
mod residual;

pub use estimator::{
    boundary_estimate, estimate_field, estimate_field_nodes, recenter, NodeWindow, ProbeEstimates,
};
pub use kernel::{bump_profile, make_kernel, Kernel, KernelDim};
pub use pairing::{test_function_pairing, TestFunction};
pub use residual::{
    residual_field, residual_statistics, residual_statistics_from_values, PairStatistic,
    ProbeStatistic, ResidualField, ResidualStatistics,
};
