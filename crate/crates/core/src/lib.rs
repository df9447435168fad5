//! Equivalence tests for Hardy-Weinberg equilibrium at a multi-allelic locus.
//!
//! Two test problems are supported. The conditional test asks whether the
//! Euclidean distance between the genotype distribution `p` and the HWE
//! distribution `e(p)` with the same allele frequencies is below a
//! tolerance ε; the minimum-distance test asks the same of `d(p, M)`, the
//! distance from `p` to the whole HWE family. Either test can be calibrated
//! by the delta method or by a bootstrap estimate of the statistic's
//! standard deviation.

pub mod bootstrap;
pub mod datasets;
pub mod error;
pub mod genotype;
pub mod projection;
pub mod rng;
pub mod simulation;
pub mod stats;

pub use bootstrap::{bootstrap_sigma, run_bootstrap_test, BootstrapOptions};
pub use error::{Error, Result};
pub use genotype::{
    allele_distribution, from_counts, hwe_distribution, l2_distance, multinomial_covariance,
    unvectorize, vectorize, AlleleDistribution, GenotypeCounts, GenotypeDistribution,
    GenotypeVector,
};
pub use projection::{grid_oracle_biallelic, project_to_hwe, ProjectionOptions, ProjectionResult};
pub use simulation::{StudyConfig, StudySummary, TestSpec};
pub use stats::{run_asymptotic_test, CalibrationKind, TestKind, TestResult};
