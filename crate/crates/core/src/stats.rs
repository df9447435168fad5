//! Test statistics `T_c` and `T_m`, their delta-method variances, the
//! asymptotic test rule and the minimum rejectable tolerance.
//!
//! With `D(p)` the squared distance to HWE (conditional `l₂²(p, e(p))` or
//! minimum `d²(p, M)`), the statistic is `T = √n (D(p_n) − ε²)` and the
//! test rejects the "far from HWE" hypothesis when `T ≤ c_α σ̂`, `c_α`
//! being the lower α-quantile of the standard normal.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use std::fmt;

use crate::error::{Error, Result};
use crate::genotype::{
    allele_freqs, cell_index, hwe_cells, squared_distance, vectorize, GenotypeDistribution,
    GenotypeVector,
};
use crate::projection::{project_to_hwe, ProjectionOptions, ProjectionResult};

/// Variances in `(-VARIANCE_FLOOR, 0)` are rounding noise and clamp to 0.
const VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TestKind {
    /// `T_c`, distance to `e(p)`.
    Conditional,
    /// `T_m`, distance to the HWE family.
    MinimumDistance,
}

impl TestKind {
    pub const ALL: [TestKind; 2] = [TestKind::Conditional, TestKind::MinimumDistance];

    pub fn short_name(self) -> &'static str {
        match self {
            TestKind::Conditional => "c",
            TestKind::MinimumDistance => "m",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::Conditional => "T_c",
            TestKind::MinimumDistance => "T_m",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CalibrationKind {
    Asymptotic,
    Bootstrap,
}

impl CalibrationKind {
    pub const ALL: [CalibrationKind; 2] = [CalibrationKind::Asymptotic, CalibrationKind::Bootstrap];

    pub fn short_name(self) -> &'static str {
        match self {
            CalibrationKind::Asymptotic => "asym",
            CalibrationKind::Bootstrap => "boot",
        }
    }
}

impl fmt::Display for CalibrationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CalibrationKind::Asymptotic => "A",
            CalibrationKind::Bootstrap => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub kind: TestKind,
    pub calibration: CalibrationKind,
    /// `T_*(p_n)`.
    pub statistic: f64,
    /// Observed distance, `l₂(p_n, e(p_n))` or `d(p_n, M)`.
    pub distance: f64,
    /// Estimated standard deviation of `T_*`.
    pub sigma: f64,
    pub alpha: f64,
    /// `c_α · σ̂`.
    pub critical_value: f64,
    pub reject: bool,
    pub epsilon: f64,
    pub min_epsilon: f64,
    pub n: u64,
}

impl TestResult {
    /// Assembles the decision from an observed distance and a σ estimate.
    pub fn from_parts(
        kind: TestKind,
        calibration: CalibrationKind,
        distance: f64,
        sigma: f64,
        n: u64,
        epsilon: f64,
        alpha: f64,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        let c_alpha = normal_quantile(alpha)?;
        let statistic = statistic(distance, n, epsilon);
        let critical_value = c_alpha * sigma;
        Ok(Self {
            kind,
            calibration,
            statistic,
            distance,
            sigma,
            alpha,
            critical_value,
            reject: statistic <= critical_value,
            epsilon,
            min_epsilon: min_epsilon(distance, n, alpha, sigma)?,
            n,
        })
    }
}

/// Lower α-quantile of the standard normal.
pub fn normal_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(Normal::standard().inverse_cdf(alpha))
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(epsilon))
    }
}

pub(crate) fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::EmptySample)
    } else {
        Ok(())
    }
}

/// `√n (distance² − ε²)`.
pub fn statistic(distance: f64, n: u64, epsilon: f64) -> f64 {
    (n as f64).sqrt() * (distance * distance - epsilon * epsilon)
}

/// `l₂²(p, e(p))` on raw triangular entries.
pub(crate) fn conditional_sq_distance(q: &[f64], k: usize) -> f64 {
    squared_distance(q, &hwe_cells(&allele_freqs(k, q)))
}

/// `T_c(p_n) = √n (l₂²(p_n, e(p_n)) − ε²)`.
pub fn t_c(p_n: &GenotypeDistribution, n: u64, epsilon: f64) -> Result<f64> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    Ok(statistic(
        conditional_sq_distance(p_n.probs(), p_n.k()).sqrt(),
        n,
        epsilon,
    ))
}

/// `T_m(p_n) = √n (d²(p_n, M) − ε²)` from a projection of `p_n`.
pub fn t_m(
    _p_n: &GenotypeDistribution,
    n: u64,
    epsilon: f64,
    proj: &ProjectionResult,
) -> Result<f64> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    if !proj.converged {
        return Err(Error::NonConverged);
    }
    Ok(statistic(proj.distance, n, epsilon))
}

/// Gradient of `q ↦ l₂²(q, e(q))` over the triangular cells.
///
/// With `r = q − e(a(q))` and `w_l = Σ_c r_c ∂e_c/∂a_l = 2 Σ_j a_j r(l, j)`,
/// the chain rule through `a(q)` gives `∂/∂q(i,j) = 2 r(i,j) − (w_i + w_j)`.
pub fn grad_c(q: &GenotypeVector) -> GenotypeVector {
    let k = q.k();
    let q = q.entries();
    let a = allele_freqs(k, q);
    let residual: Vec<f64> = q.iter().zip(hwe_cells(&a)).map(|(x, e)| x - e).collect();
    let sym = |i: usize, j: usize| {
        if i >= j {
            residual[cell_index(i, j)]
        } else {
            residual[cell_index(j, i)]
        }
    };
    let w: Vec<f64> = (0..k)
        .map(|l| 2.0 * (0..k).map(|j| a[j] * sym(l, j)).sum::<f64>())
        .collect();
    let grad = crate::genotype::cells(k)
        .map(|(i, j)| 2.0 * sym(i, j) - (w[i] + w[j]))
        .collect();
    GenotypeVector::from_vec_unchecked(grad)
}

/// Gradient of `q ↦ l₂²(q, h)` with `h` held fixed: `2 (q − h)`.
pub fn grad_m(q: &GenotypeVector, h: &GenotypeDistribution) -> Result<GenotypeVector> {
    if q.len() != h.probs().len() {
        return Err(Error::DimensionMismatch {
            expected: h.probs().len(),
            actual: q.len(),
        });
    }
    Ok(GenotypeVector::from_vec_unchecked(
        q.entries()
            .iter()
            .zip(h.probs())
            .map(|(x, y)| 2.0 * (x - y))
            .collect(),
    ))
}

/// `gradᵗ (D_q − q qᵗ) grad = Σ q_c g_c² − (Σ q_c g_c)²`.
pub fn asymptotic_variance(grad: &GenotypeVector, q: &GenotypeVector) -> Result<f64> {
    if grad.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            actual: grad.len(),
        });
    }
    let (second, first) = grad
        .entries()
        .iter()
        .zip(q.entries())
        .fold((0.0, 0.0), |(s2, s1), (g, p)| (s2 + p * g * g, s1 + p * g));
    let var = second - first * first;
    if var < -VARIANCE_FLOOR {
        return Err(Error::NegativeVariance(var));
    }
    Ok(var.max(0.0))
}

/// Smallest ε at which the rule can reject: `√(D² − n^{-½} c_α σ)`.
///
/// `distance` is `l₂(p_n, e(p_n))` for `T_c` and `d(p_n, M)` for `T_m`
/// (squared in both cases).
pub fn min_epsilon(distance: f64, n: u64, alpha: f64, sigma: f64) -> Result<f64> {
    check_n(n)?;
    let c_alpha = normal_quantile(alpha)?;
    let radicand = distance * distance - c_alpha * sigma / (n as f64).sqrt();
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand(radicand));
    }
    Ok(radicand.sqrt())
}

/// Distance and, for `T_m`, the projection used to get it.
#[derive(Debug, Clone)]
pub struct ObservedDistance {
    pub distance: f64,
    pub projection: Option<ProjectionResult>,
}

pub fn observed_distance(
    p_n: &GenotypeDistribution,
    kind: TestKind,
    opts: &ProjectionOptions,
) -> Result<ObservedDistance> {
    match kind {
        TestKind::Conditional => Ok(ObservedDistance {
            distance: conditional_sq_distance(p_n.probs(), p_n.k()).sqrt(),
            projection: None,
        }),
        TestKind::MinimumDistance => {
            let proj = project_to_hwe(p_n, opts)?;
            if !proj.converged {
                return Err(Error::NonConverged);
            }
            Ok(ObservedDistance {
                distance: proj.distance,
                projection: Some(proj),
            })
        }
    }
}

/// Plug-in `σ_*(p_n)` from the delta method.
pub fn asymptotic_sigma(p_n: &GenotypeDistribution, observed: &ObservedDistance) -> Result<f64> {
    let q = vectorize(p_n);
    let grad = match &observed.projection {
        None => grad_c(&q),
        Some(proj) => grad_m(&q, &proj.h_of_p)?,
    };
    Ok(asymptotic_variance(&grad, &q)?.sqrt())
}

/// The asymptotic test with default projection options.
pub fn run_asymptotic_test(
    p_n: &GenotypeDistribution,
    n: u64,
    epsilon: f64,
    alpha: f64,
    kind: TestKind,
) -> Result<TestResult> {
    run_asymptotic_test_with(p_n, n, epsilon, alpha, kind, &ProjectionOptions::default())
}

pub fn run_asymptotic_test_with(
    p_n: &GenotypeDistribution,
    n: u64,
    epsilon: f64,
    alpha: f64,
    kind: TestKind,
    opts: &ProjectionOptions,
) -> Result<TestResult> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    normal_quantile(alpha)?;
    let observed = observed_distance(p_n, kind, opts)?;
    let sigma = asymptotic_sigma(p_n, &observed)?;
    TestResult::from_parts(
        kind,
        CalibrationKind::Asymptotic,
        observed.distance,
        sigma,
        n,
        epsilon,
        alpha,
    )
}
