//! Reference statistics of the hyperbolic GAF zero process and local
//! estimators for an observed zero pattern.

pub mod estimators;
pub mod reference;

pub use estimators::{
    chebyshev_deviation_test, estimate_local_intensity, estimate_pcf, ChebyshevOutcome, PCFEstimate,
    PcfWorkspace,
};
pub use reference::{
    corrected_pcf, count_variance, expected_count, first_intensity, pair_correlation, pair_correlation_raw,
    ring_count_expectation, ReferenceStats,
};
