//! Monte-Carlo studies: power at HWE, sensitivity of that power to the
//! sampling error in `p_n`, and rejection rates at random boundary points
//! of the null hypothesis.
//!
//! All randomness is drawn from streams keyed by `(seed, tag, indices)`
//! (see [`crate::rng`]), and every parallel map collects into an indexed
//! vector before reduction, so results are identical for any thread count.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

use crate::bootstrap::{bootstrap_sigma_serial, resample, BootstrapOptions};
use crate::error::{Error, Result};
use crate::genotype::{from_counts, GenotypeCounts, GenotypeDistribution};
use crate::projection::{project_to_hwe, ProjectionOptions};
use crate::rng::{self, derive_seed, StreamRng};
use crate::stats::{
    asymptotic_sigma, check_epsilon, check_n, conditional_sq_distance, normal_quantile,
    observed_distance, statistic, CalibrationKind, TestKind,
};

const TAG_SAMPLE: u64 = 1;
const TAG_BOOTSTRAP: u64 = 2;
const TAG_POINT: u64 = 3;
const TAG_RATES: u64 = 4;
const TAG_BOUNDARY: u64 = 5;

/// Resamples rejected in a row before a boundary search gives up.
pub const MAX_BOUNDARY_ATTEMPTS: usize = 1000;

/// Bisection stops when the bracket on the mixing weight is this narrow.
const BISECTION_WIDTH: f64 = 1e-10;

/// Bootstrap replicates used inside studies unless overridden.
pub const STUDY_BOOTSTRAP_REPLICATES: usize = 250;

/// One of the four tests: statistic and calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TestSpec {
    pub kind: TestKind,
    pub calibration: CalibrationKind,
}

impl TestSpec {
    pub fn new(kind: TestKind, calibration: CalibrationKind) -> Self {
        Self { kind, calibration }
    }

    /// `T_c A, T_c B, T_m A, T_m B`, the conventional row order of result tables.
    pub fn all() -> Vec<TestSpec> {
        TestKind::ALL
            .iter()
            .flat_map(|&k| {
                CalibrationKind::ALL
                    .iter()
                    .map(move |&c| TestSpec::new(k, c))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    /// Used in the `dataset` CSV column.
    pub label: String,
    pub dataset: GenotypeCounts,
    pub epsilon: f64,
    pub alpha: f64,
    pub replications: usize,
    pub eval_points: usize,
    pub seed: u64,
    pub tests: Vec<TestSpec>,
    pub bootstrap_replicates: usize,
}

impl StudyConfig {
    pub fn new(label: impl Into<String>, dataset: GenotypeCounts, epsilon: f64) -> Self {
        Self {
            label: label.into(),
            dataset,
            epsilon,
            alpha: 0.05,
            replications: 1000,
            eval_points: 100,
            seed: 0,
            tests: TestSpec::all(),
            bootstrap_replicates: STUDY_BOOTSTRAP_REPLICATES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        normal_quantile(self.alpha)?;
        if self.replications == 0 || self.eval_points == 0 {
            return Err(Error::InvalidOption(
                "replications and eval_points must be >= 1".into(),
            ));
        }
        if self.tests.is_empty() {
            return Err(Error::InvalidOption("no tests selected".into()));
        }
        if self.bootstrap_replicates < 2 {
            return Err(Error::InvalidOption(
                "bootstrap replicates must be >= 2".into(),
            ));
        }
        Ok(())
    }

    fn observed(&self) -> Result<GenotypeDistribution> {
        from_counts(&self.dataset)
    }
}

/// Shared settings for simulating rejection rates.
#[derive(Debug, Clone, Copy)]
struct RateSettings<'a> {
    n: u64,
    alpha: f64,
    tests: &'a [TestSpec],
    replications: usize,
    bootstrap_replicates: usize,
    seed: u64,
}

/// Rejection rates `[test][epsilon]` at `target`.
///
/// Each replicate draws one multinomial sample and evaluates every test on
/// it; the distance and σ do not depend on ε, so one evaluation serves the
/// whole ε list.
fn rejection_rates(
    target: &GenotypeDistribution,
    epsilons: &[f64],
    s: RateSettings<'_>,
) -> Result<Vec<Vec<f64>>> {
    let c_alpha = normal_quantile(s.alpha)?;
    let per_rep: Vec<Vec<Vec<bool>>> = (0..s.replications)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Vec<bool>>> {
            let mut stream = rng::stream(s.seed, &[TAG_SAMPLE, rep as u64]);
            let p = from_counts(&resample(target, s.n, &mut stream))?;
            let boot_seed = derive_seed(s.seed, &[TAG_BOOTSTRAP, rep as u64]);
            s.tests
                .iter()
                .map(|spec| {
                    let (distance, sigma) = distance_and_sigma(&p, s.n, *spec, boot_seed, s)?;
                    Ok(epsilons
                        .iter()
                        .map(|&eps| statistic(distance, s.n, eps) <= c_alpha * sigma)
                        .collect())
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok((0..s.tests.len())
        .map(|t| {
            (0..epsilons.len())
                .map(|e| {
                    let hits = per_rep.iter().filter(|rep| rep[t][e]).count();
                    hits as f64 / s.replications as f64
                })
                .collect()
        })
        .collect())
}

fn distance_and_sigma(
    p: &GenotypeDistribution,
    n: u64,
    spec: TestSpec,
    boot_seed: u64,
    s: RateSettings<'_>,
) -> Result<(f64, f64)> {
    let observed = observed_distance(p, spec.kind, &ProjectionOptions::warm_start_only())?;
    let sigma = match spec.calibration {
        CalibrationKind::Asymptotic => asymptotic_sigma(p, &observed)?,
        CalibrationKind::Bootstrap => {
            let opts = BootstrapOptions::new(spec.kind, s.bootstrap_replicates, boot_seed);
            bootstrap_sigma_serial(p, n, &opts)?
        }
    };
    Ok((observed.distance, sigma))
}

/// Fraction of `reps` multinomial(n, target) samples on which the test rejects.
#[allow(clippy::too_many_arguments)]
pub fn power_at(
    target: &GenotypeDistribution,
    n: u64,
    epsilon: f64,
    alpha: f64,
    spec: TestSpec,
    reps: usize,
    bootstrap_replicates: usize,
    seed: u64,
) -> Result<f64> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    if reps == 0 {
        return Err(Error::InvalidOption("reps must be >= 1".into()));
    }
    let settings = RateSettings {
        n,
        alpha,
        tests: &[spec],
        replications: reps,
        bootstrap_replicates,
        seed,
    };
    Ok(rejection_rates(target, &[epsilon], settings)?[0][0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerCell {
    pub test: TestSpec,
    pub epsilon: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerGrid {
    pub label: String,
    pub cells: Vec<PowerCell>,
}

impl PowerGrid {
    pub fn rate(&self, test: TestSpec, epsilon: f64) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.test == test && c.epsilon == epsilon)
            .map(|c| c.rate)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,kind,calib,eps,rate\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.label,
                c.test.kind.short_name(),
                c.test.calibration.short_name(),
                sig6(c.epsilon),
                sig6(c.rate)
            );
        }
        out
    }
}

/// Power at `e(p_n)` over a list of tolerances, for every configured test.
pub fn power_grid(epsilons: &[f64], config: &StudyConfig) -> Result<PowerGrid> {
    config.validate()?;
    for &eps in epsilons {
        check_epsilon(eps)?;
    }
    let target = config.observed()?.hwe();
    let settings = RateSettings {
        n: config.dataset.n(),
        alpha: config.alpha,
        tests: &config.tests,
        replications: config.replications,
        bootstrap_replicates: config.bootstrap_replicates,
        seed: config.seed,
    };
    let rates = rejection_rates(&target, epsilons, settings)?;
    let cells = config
        .tests
        .iter()
        .zip(rates)
        .flat_map(|(&test, row)| {
            epsilons
                .iter()
                .zip(row)
                .map(move |(&epsilon, rate)| PowerCell {
                    test,
                    epsilon,
                    rate,
                })
        })
        .collect();
    Ok(PowerGrid {
        label: config.label.clone(),
        cells,
    })
}

/// Min, max, mean and standard deviation of rates over evaluation points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSummary {
    pub test: TestSpec,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single point.
    pub dev: f64,
    pub rates: Vec<f64>,
}

impl RateSummary {
    pub fn from_rates(test: TestSpec, rates: Vec<f64>) -> Self {
        let count = rates.len() as f64;
        let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = (rates.iter().sum::<f64>() / count).clamp(min, max);
        let dev = if rates.len() > 1 {
            (rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (count - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            test,
            min,
            max,
            mean,
            dev,
            rates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudySummary {
    pub label: String,
    pub epsilon: f64,
    pub summaries: Vec<RateSummary>,
}

impl StudySummary {
    pub fn get(&self, test: TestSpec) -> Option<&RateSummary> {
        self.summaries.iter().find(|s| s.test == test)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,kind,calib,eps,min,max,mean,dev\n");
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.label,
                s.test.kind.short_name(),
                s.test.calibration.short_name(),
                sig6(self.epsilon),
                sig6(s.min),
                sig6(s.max),
                sig6(s.mean),
                sig6(s.dev)
            );
        }
        out
    }
}

/// Power at HWE under sampling error in the allele frequencies.
///
/// Each evaluation point is `e(p̃)`, where `p̃` is a frequency table of a
/// multinomial(n, e(p_n)) sample; the power is then simulated at that HWE
/// distribution.
pub fn sensitivity_study(config: &StudyConfig) -> Result<StudySummary> {
    config.validate()?;
    let n = config.dataset.n();
    let implied = config.observed()?.hwe();
    let per_point: Vec<Vec<f64>> = (0..config.eval_points)
        .into_par_iter()
        .map(|e| -> Result<Vec<f64>> {
            let mut stream = rng::stream(config.seed, &[TAG_POINT, e as u64]);
            let point = from_counts(&resample(&implied, n, &mut stream))?.hwe();
            let settings = RateSettings {
                n,
                alpha: config.alpha,
                tests: &config.tests,
                replications: config.replications,
                bootstrap_replicates: config.bootstrap_replicates,
                seed: derive_seed(config.seed, &[TAG_RATES, e as u64]),
            };
            Ok(rejection_rates(&point, &[config.epsilon], settings)?
                .into_iter()
                .map(|row| row[0])
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(summarize(config, &config.tests, &per_point))
}

fn summarize(config: &StudyConfig, tests: &[TestSpec], per_point: &[Vec<f64>]) -> StudySummary {
    let summaries = tests
        .iter()
        .enumerate()
        .map(|(t, &test)| RateSummary::from_rates(test, per_point.iter().map(|r| r[t]).collect()))
        .collect();
    StudySummary {
        label: config.label.clone(),
        epsilon: config.epsilon,
        summaries,
    }
}

/// A point with squared distance exactly ε² on the segment from `e(p_n)`
/// to an accepted resample.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub point: GenotypeDistribution,
    /// The resample `p̃` that was accepted.
    pub resample: GenotypeDistribution,
    /// Mixing weight `a_n` on `p̃`.
    pub weight: f64,
    /// Resamples drawn, including the accepted one.
    pub attempts: usize,
}

/// Squared distance used by `kind`: `l₂²(p, e(p))` or `d²(p, M)`.
pub fn squared_distance_for(p: &GenotypeDistribution, kind: TestKind) -> Result<f64> {
    match kind {
        TestKind::Conditional => Ok(conditional_sq_distance(p.probs(), p.k())),
        TestKind::MinimumDistance => {
            let proj = project_to_hwe(p, &ProjectionOptions::default())?;
            if !proj.converged {
                return Err(Error::NonConverged);
            }
            Ok(proj.distance * proj.distance)
        }
    }
}

/// Draws a random boundary point of the null hypothesis near `p_n`.
///
/// Resamples `p̃` of size `n` from `p_n` until `T_*(p̃) ≥ 0`, then bisects
/// `g(w) = D(w p̃ + (1 − w) e(p_n)) − ε²` on `[0, 1]`.
pub fn random_boundary_point(
    p_n: &GenotypeDistribution,
    n: u64,
    epsilon: f64,
    kind: TestKind,
    rng: &mut StreamRng,
) -> Result<BoundaryPoint> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    let eps2 = epsilon * epsilon;
    let implied = p_n.hwe();
    if squared_distance_for(&implied, kind)? >= eps2 {
        return Err(Error::InvalidOption(
            "e(p_n) is not inside the alternative at this tolerance".into(),
        ));
    }

    for attempt in 1..=MAX_BOUNDARY_ATTEMPTS {
        let candidate = from_counts(&resample(p_n, n, rng))?;
        let g_one = squared_distance_for(&candidate, kind)? - eps2;
        if g_one < 0.0 {
            continue;
        }
        let (weight, point) = bisect_boundary(&candidate, &implied, kind, eps2, g_one)?;
        return Ok(BoundaryPoint {
            point,
            resample: candidate,
            weight,
            attempts: attempt,
        });
    }
    Err(Error::AbortBoundarySearch(MAX_BOUNDARY_ATTEMPTS))
}

fn bisect_boundary(
    candidate: &GenotypeDistribution,
    implied: &GenotypeDistribution,
    kind: TestKind,
    eps2: f64,
    g_one: f64,
) -> Result<(f64, GenotypeDistribution)> {
    if g_one == 0.0 {
        return Ok((1.0, candidate.mix(implied, 1.0)?));
    }
    // g(lo) < 0 <= g(hi)
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut hi_g = g_one;
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        let g = squared_distance_for(&candidate.mix(implied, mid)?, kind)? - eps2;
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
            hi_g = g;
            if g == 0.0 {
                break;
            }
        }
    }
    let lo_point = candidate.mix(implied, lo)?;
    let lo_g = squared_distance_for(&lo_point, kind)? - eps2;
    if lo_g.abs() < hi_g.abs() {
        Ok((lo, lo_point))
    } else {
        Ok((hi, candidate.mix(implied, hi)?))
    }
}

/// Rejection rates at random boundary points near the observed data.
///
/// Boundary points depend on the statistic, so each kind gets its own set
/// of points; both calibrations of a kind are evaluated on the same points.
pub fn boundary_study(config: &StudyConfig) -> Result<StudySummary> {
    config.validate()?;
    let n = config.dataset.n();
    let p_n = config.observed()?;

    let mut kinds: Vec<TestKind> = config.tests.iter().map(|t| t.kind).collect();
    kinds.dedup();
    kinds.sort();
    kinds.dedup();

    let mut summaries = Vec::with_capacity(config.tests.len());
    for kind in kinds {
        let tests: Vec<TestSpec> = config
            .tests
            .iter()
            .copied()
            .filter(|t| t.kind == kind)
            .collect();
        let kind_tag = kind as u64;
        let per_point: Vec<Vec<f64>> = (0..config.eval_points)
            .into_par_iter()
            .map(|e| -> Result<Vec<f64>> {
                let mut stream = rng::stream(config.seed, &[TAG_BOUNDARY, kind_tag, e as u64]);
                let boundary = random_boundary_point(&p_n, n, config.epsilon, kind, &mut stream)?;
                let settings = RateSettings {
                    n,
                    alpha: config.alpha,
                    tests: &tests,
                    replications: config.replications,
                    bootstrap_replicates: config.bootstrap_replicates,
                    seed: derive_seed(config.seed, &[TAG_RATES, kind_tag, e as u64]),
                };
                Ok(
                    rejection_rates(&boundary.point, &[config.epsilon], settings)?
                        .into_iter()
                        .map(|row| row[0])
                        .collect(),
                )
            })
            .collect::<Result<_>>()?;
        summaries.extend(summarize(config, &tests, &per_point).summaries);
    }
    // report in the configured order
    summaries.sort_by_key(|s| config.tests.iter().position(|t| *t == s.test));
    Ok(StudySummary {
        label: config.label.clone(),
        epsilon: config.epsilon,
        summaries,
    })
}

/// Six significant digits, shortest representation.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("valid float");
    format!("{rounded}")
}
