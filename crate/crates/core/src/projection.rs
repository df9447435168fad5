//! Minimum distance from a genotype distribution to the HWE family.
//!
//! The HWE family is the image of the allele simplex under
//! `a ↦ hwe_distribution(a)`, so `d(p, M)² = min_a f(a)` with
//! `f(a) = Σ_cells (p − hwe(a))²`. `f` is a quartic in `a`; we minimize it
//! by projected gradient descent on the simplex with Barzilai-Borwein step
//! lengths and Armijo backtracking, started from `a(p)` and from a few
//! uniform random points.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::genotype::{
    cell_index, hwe_cells, squared_distance, AlleleDistribution, GenotypeDistribution,
};
use crate::rng;

/// Stop when a full step moves less than this.
const STEP_NORM_TOL: f64 = 1e-12;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionOptions {
    /// Stop once one iteration decreases the objective by less than this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Random Dirichlet(1, ..., 1) starts in addition to `a(p)`.
    pub restarts: usize,
    /// Seed for the random starts.
    pub seed: u64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
            restarts: 5,
            seed: 0,
        }
    }
}

impl ProjectionOptions {
    /// Single warm start from `a(p)`; used inside resampling loops.
    pub fn warm_start_only() -> Self {
        Self {
            restarts: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidOption(format!(
                "projection tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidOption("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    /// Minimizing allele distribution `a*`.
    pub argmin_alleles: AlleleDistribution,
    /// `h(p) = hwe_distribution(a*)`.
    pub h_of_p: GenotypeDistribution,
    /// `d(p, M)`.
    pub distance: f64,
    /// Whether the selected start met the stopping rule.
    pub converged: bool,
    /// Iterations used by the selected start.
    pub iterations: usize,
    /// Final distance of every start, `a(p)` first.
    pub restart_distances: Vec<f64>,
}

struct Descent {
    alleles: Vec<f64>,
    objective: f64,
    converged: bool,
    iterations: usize,
}

/// Computes `d(p, M)` and the minimizer `h(p)`.
pub fn project_to_hwe(
    p: &GenotypeDistribution,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    opts.validate()?;
    let k = p.k();
    let target = p.probs();

    let mut starts = Vec::with_capacity(opts.restarts + 1);
    starts.push(p.alleles().freqs().to_vec());
    for r in 0..opts.restarts {
        let mut stream = rng::stream(opts.seed, &[r as u64]);
        starts.push(rng::uniform_dirichlet(&mut stream, k));
    }

    let mut best: Option<Descent> = None;
    let mut restart_distances = Vec::with_capacity(starts.len());
    for start in starts {
        let run = descend(target, k, start, opts);
        restart_distances.push(run.objective.max(0.0).sqrt());
        // strict comparison keeps the lowest-index start on ties
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");

    let h = GenotypeDistribution::from_parts_unchecked(k, hwe_cells(&best.alleles));
    let distance = squared_distance(target, h.probs()).sqrt();
    Ok(ProjectionResult {
        argmin_alleles: AlleleDistribution::from_vec_unchecked(best.alleles),
        h_of_p: h,
        distance,
        converged: best.converged,
        iterations: best.iterations,
        restart_distances,
    })
}

fn descend(target: &[f64], k: usize, start: Vec<f64>, opts: &ProjectionOptions) -> Descent {
    let mut a = project_to_simplex(&start);
    let mut f = objective(target, &a);
    let mut g = gradient(target, &a);
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;

        // backtrack along the projection arc
        let (cand, f_cand) = loop {
            let trial: Vec<f64> = a.iter().zip(&g).map(|(x, d)| x - step * d).collect();
            let cand = project_to_simplex(&trial);
            let moved = squared_distance(&cand, &a);
            let f_cand = objective(target, &cand);
            if f_cand <= f - ARMIJO / step * moved || moved == 0.0 {
                break (cand, f_cand);
            }
            step *= 0.5;
            if step < 1e-30 {
                break (a.clone(), f);
            }
        };

        let s: Vec<f64> = cand.iter().zip(&a).map(|(x, y)| x - y).collect();
        let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let decrease = f - f_cand;
        let g_cand = gradient(target, &cand);

        let sy: f64 = s
            .iter()
            .zip(g_cand.iter().zip(&g))
            .map(|(si, (gn, go))| si * (gn - go))
            .sum();
        step = if sy > 0.0 {
            (s_norm * s_norm / sy).clamp(1e-10, 1e10)
        } else {
            (step * 2.0).min(1e10)
        };

        a = cand;
        f = f_cand;
        g = g_cand;

        if decrease < opts.tolerance || s_norm < STEP_NORM_TOL {
            converged = true;
            break;
        }
    }
    debug_assert_eq!(a.len(), k);
    Descent {
        alleles: a,
        objective: f,
        converged,
        iterations,
    }
}

/// `f(a) = Σ (p − hwe(a))²`.
fn objective(target: &[f64], a: &[f64]) -> f64 {
    squared_distance(target, &hwe_cells(a))
}

/// `∂f/∂a_l = −4 Σ_j a_j r(l, j)` with `r = p − hwe(a)` read symmetrically.
fn gradient(target: &[f64], a: &[f64]) -> Vec<f64> {
    let k = a.len();
    let residual: Vec<f64> = target
        .iter()
        .zip(hwe_cells(a))
        .map(|(p, e)| p - e)
        .collect();
    (0..k)
        .map(|l| {
            let s: f64 = (0..k)
                .map(|j| {
                    let c = if l >= j {
                        cell_index(l, j)
                    } else {
                        cell_index(j, l)
                    };
                    a[j] * residual[c]
                })
                .sum();
            -4.0 * s
        })
        .collect()
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Brute-force `d(p, M)` for two alleles: grid over `a₁`, then ternary
/// refinement in the bracket around the best grid point.
pub fn grid_oracle_biallelic(p: &GenotypeDistribution, grid_size: usize) -> Result<f64> {
    if p.k() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: p.k(),
        });
    }
    if grid_size == 0 {
        return Err(Error::InvalidOption("grid_size must be >= 1".into()));
    }
    let target = p.probs();
    let f = |a1: f64| objective(target, &[a1, 1.0 - a1]);
    let g = grid_size as f64;
    let best_i = (0..=grid_size)
        .min_by(|&i, &j| f(i as f64 / g).total_cmp(&f(j as f64 / g)))
        .expect("non-empty grid");
    let mut lo = (best_i as f64 - 1.0).max(0.0) / g;
    let mut hi = (best_i as f64 + 1.0).min(g) / g;
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let refined = f(0.5 * (lo + hi));
    let grid_best = f(best_i as f64 / g);
    Ok(refined.min(grid_best).max(0.0).sqrt())
}
