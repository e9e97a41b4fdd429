//! Monte Carlo ensembles, log-slope fits, non-intersection exponents and
//! report files.

pub mod config;
mod ensemble;
pub mod experiments;
pub mod exponent;
pub mod fit;
pub mod report;
pub mod stats;

pub use config::{parse_pairs, parse_scale, ExperimentConfig, ExperimentKind};
pub use ensemble::{
    replicate_seed, run_ensemble, run_ensemble_with, run_suite, Aggregate, Check, EnsembleResult, NamedFit,
    Relation, ReplicateFailure, ReplicateRecord, Table,
};
pub use exponent::{estimate_nonintersection_exponent, estimate_nonintersection_exponent_with, ExponentEstimate, PairSpec};
pub use fit::{fit_log_slope, linear_fit, LineFit};
pub use report::{export_report, reaggregate_report};
