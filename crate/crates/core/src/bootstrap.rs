//! Nonparametric bootstrap estimate of the standard deviation of `T_*`.
//!
//! Resamples are multinomial draws of size `n` from the observed
//! frequencies `p_n`. Because `T_* = √n (D − ε²)` is a shift of `√n D`,
//! the bootstrap standard deviation does not depend on ε.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::genotype::{from_counts, GenotypeCounts, GenotypeDistribution};
use crate::projection::{project_to_hwe, ProjectionOptions};
use crate::rng::{self, StreamRng};
use crate::stats::{
    check_epsilon, check_n, conditional_sq_distance, normal_quantile, observed_distance,
    CalibrationKind, TestKind, TestResult,
};

/// Stream tag separating bootstrap draws from other consumers of a seed.
const STREAM_TAG: u64 = 0xB007;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub seed: u64,
    pub kind: TestKind,
}

impl BootstrapOptions {
    pub fn new(kind: TestKind, replicates: usize, seed: u64) -> Self {
        Self {
            replicates,
            seed,
            kind,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidOption(format!(
                "bootstrap needs at least 2 replicates, got {}",
                self.replicates
            )));
        }
        Ok(())
    }
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            replicates: 500,
            seed: 0,
            kind: TestKind::Conditional,
        }
    }
}

/// One multinomial(n, p_n) resample as genotype counts.
pub fn resample(p_n: &GenotypeDistribution, n: u64, rng: &mut StreamRng) -> GenotypeCounts {
    let counts = rng::sample_multinomial(rng, n, p_n.probs());
    GenotypeCounts::new(p_n.k(), counts).expect("shape preserved")
}

/// Squared distance of a resample, or `None` if the projection stalled.
fn replicate_statistic(
    p_n: &GenotypeDistribution,
    n: u64,
    kind: TestKind,
    seed: u64,
    index: usize,
) -> Option<f64> {
    let mut stream = rng::stream(seed, &[STREAM_TAG, index as u64]);
    let p_b = from_counts(&resample(p_n, n, &mut stream)).expect("n >= 1");
    match kind {
        TestKind::Conditional => Some(conditional_sq_distance(p_b.probs(), p_b.k())),
        TestKind::MinimumDistance => {
            let proj = project_to_hwe(&p_b, &ProjectionOptions::warm_start_only()).ok()?;
            proj.converged.then_some(proj.distance * proj.distance)
        }
    }
}

fn sigma_from_statistics(values: &[Option<f64>], n: u64) -> Result<f64> {
    let replicates = values.len();
    let kept: Vec<f64> = values
        .iter()
        .flatten()
        .map(|d| (n as f64).sqrt() * d)
        .collect();
    let skipped = replicates - kept.len();
    if skipped * 100 > replicates || kept.len() < 2 {
        return Err(Error::TooManySkipped {
            skipped,
            replicates,
        });
    }
    // shifted by the first value, so identical replicates give exactly 0
    let shift = kept[0];
    let mean = kept.iter().map(|x| x - shift).sum::<f64>() / kept.len() as f64;
    let ss: f64 = kept
        .iter()
        .map(|x| (x - shift - mean) * (x - shift - mean))
        .sum();
    Ok((ss / (kept.len() - 1) as f64).sqrt())
}

/// Bootstrap standard deviation of `T_*`, replicates run in parallel.
pub fn bootstrap_sigma(p_n: &GenotypeDistribution, n: u64, opts: &BootstrapOptions) -> Result<f64> {
    check_n(n)?;
    opts.validate()?;
    let values: Vec<Option<f64>> = (0..opts.replicates)
        .into_par_iter()
        .map(|b| replicate_statistic(p_n, n, opts.kind, opts.seed, b))
        .collect();
    sigma_from_statistics(&values, n)
}

/// Same result as [`bootstrap_sigma`], on the calling thread. Used when the
/// caller already parallelizes at a coarser grain.
pub fn bootstrap_sigma_serial(
    p_n: &GenotypeDistribution,
    n: u64,
    opts: &BootstrapOptions,
) -> Result<f64> {
    check_n(n)?;
    opts.validate()?;
    let values: Vec<Option<f64>> = (0..opts.replicates)
        .map(|b| replicate_statistic(p_n, n, opts.kind, opts.seed, b))
        .collect();
    sigma_from_statistics(&values, n)
}

/// The asymptotic test rule with σ replaced by the bootstrap estimate.
pub fn run_bootstrap_test(
    p_n: &GenotypeDistribution,
    n: u64,
    epsilon: f64,
    alpha: f64,
    opts: &BootstrapOptions,
) -> Result<TestResult> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    normal_quantile(alpha)?;
    let observed = observed_distance(p_n, opts.kind, &ProjectionOptions::default())?;
    let sigma = bootstrap_sigma(p_n, n, opts)?;
    TestResult::from_parts(
        opts.kind,
        CalibrationKind::Bootstrap,
        observed.distance,
        sigma,
        n,
        epsilon,
        alpha,
    )
}
