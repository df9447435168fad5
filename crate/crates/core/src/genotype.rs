//! Genotype and allele distributions at a single k-allele locus.
//!
//! A genotype distribution is a lower-triangular matrix `p(i, j)`, `i >= j`,
//! stored row-major over the triangle: `(1,1), (2,1), (2,2), (3,1), ...,
//! (k,k)`. The same ordering is the vectorization used for gradients and
//! the multinomial covariance, so [`vectorize`] is a relabelling and not a
//! copy into a different layout.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on `Σ p = 1` and `Σ a = 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Number of distinct genotypes `k(k+1)/2` for `k` alleles.
#[inline]
pub fn genotype_count(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Position of genotype `(i, j)` (0-based, `i >= j`) in the triangular layout.
#[inline]
pub fn cell_index(i: usize, j: usize) -> usize {
    debug_assert!(j <= i);
    i * (i + 1) / 2 + j
}

/// Recovers `k` from a triangular length, if there is one with `k >= 2`.
pub fn alleles_for_len(m: usize) -> Option<usize> {
    // k = (sqrt(8m + 1) - 1) / 2
    let k = (((8 * m + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (k..=k + 1).find(|&k| k >= 2 && genotype_count(k) == m)
}

/// Iterates `(i, j)` pairs in layout order.
pub fn cells(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(|i| (0..=i).map(move |j| (i, j)))
}

/// Observed genotype counts from a sample of `n` diploid individuals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenotypeCounts {
    k: usize,
    counts: Vec<u64>,
    n: u64,
}

impl GenotypeCounts {
    /// Builds counts from the triangular layout. `n` may be zero here;
    /// [`from_counts`] rejects empty samples.
    pub fn new(k: usize, counts: Vec<u64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewAlleles(k));
        }
        if counts.len() != genotype_count(k) {
            return Err(Error::DimensionMismatch {
                expected: genotype_count(k),
                actual: counts.len(),
            });
        }
        let n = counts.iter().sum();
        Ok(Self { k, counts, n })
    }

    /// Builds counts from ragged rows, row `i` holding `i + 1` entries.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::DimensionMismatch {
                    expected: i + 1,
                    actual: row.len(),
                });
            }
        }
        Self::new(rows.len(), rows.iter().flatten().copied().collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Count of genotype `(i, j)`, 0-based; the pair is unordered.
    pub fn get(&self, i: usize, j: usize) -> u64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.counts[cell_index(i, j)]
    }

    /// Rows of the lower triangle.
    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        (0..self.k).map(move |i| &self.counts[cell_index(i, 0)..=cell_index(i, i)])
    }
}

/// A probability distribution over the `k(k+1)/2` genotypes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenotypeDistribution {
    k: usize,
    probs: Vec<f64>,
}

impl GenotypeDistribution {
    pub fn new(k: usize, probs: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewAlleles(k));
        }
        if probs.len() != genotype_count(k) {
            return Err(Error::DimensionMismatch {
                expected: genotype_count(k),
                actual: probs.len(),
            });
        }
        check_simplex(&probs)?;
        Ok(Self { k, probs })
    }

    /// Point mass at genotype `(i, j)` (0-based).
    pub fn point_mass(k: usize, i: usize, j: usize) -> Result<Self> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i >= k {
            return Err(Error::InvalidDistribution(format!(
                "genotype ({i}, {j}) out of range for k = {k}"
            )));
        }
        let mut probs = vec![0.0; genotype_count(k)];
        probs[cell_index(i, j)] = 1.0;
        Self::new(k, probs)
    }

    pub(crate) fn from_parts_unchecked(k: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), genotype_count(k));
        Self { k, probs }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `p(i, j)` for 0-based alleles; the pair is unordered.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.probs[cell_index(i, j)]
    }

    pub fn alleles(&self) -> AlleleDistribution {
        allele_distribution(self)
    }

    /// The HWE distribution `e(p)` implied by this distribution's alleles.
    pub fn hwe(&self) -> GenotypeDistribution {
        hwe_distribution(&self.alleles())
    }

    /// Pointwise `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &GenotypeDistribution, w: f64) -> Result<GenotypeDistribution> {
        self.check_same_k(other)?;
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidOption(format!(
                "mixing weight {w} outside [0, 1]"
            )));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(p, q)| w * p + (1.0 - w) * q)
            .collect();
        Ok(Self::from_parts_unchecked(self.k, probs))
    }

    fn check_same_k(&self, other: &GenotypeDistribution) -> Result<()> {
        if self.k != other.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                actual: other.k,
            });
        }
        Ok(())
    }
}

/// Allele frequencies `a(p)`, a point on the `k`-simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlleleDistribution {
    freqs: Vec<f64>,
}

impl AlleleDistribution {
    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        if freqs.len() < 2 {
            return Err(Error::TooFewAlleles(freqs.len()));
        }
        check_simplex(&freqs)?;
        Ok(Self { freqs })
    }

    pub(crate) fn from_vec_unchecked(freqs: Vec<f64>) -> Self {
        Self { freqs }
    }

    pub fn k(&self) -> usize {
        self.freqs.len()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn hwe(&self) -> GenotypeDistribution {
        hwe_distribution(self)
    }
}

/// The image of a genotype distribution under the vectorization.
///
/// Entries are not required to lie on the simplex: gradients and
/// finite-difference probes live in the same space.
#[derive(Debug, Clone, PartialEq)]
pub struct GenotypeVector(Vec<f64>);

impl GenotypeVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        alleles_for_len(entries.len()).ok_or(Error::NotTriangular(entries.len()))?;
        Ok(Self(entries))
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn k(&self) -> usize {
        alleles_for_len(self.0.len()).expect("validated on construction")
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

fn check_simplex(x: &[f64]) -> Result<()> {
    if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidDistribution(format!(
            "entry {v} outside [0, 1]"
        )));
    }
    let total: f64 = x.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Observed genotype frequencies `p_n = counts / n`.
pub fn from_counts(c: &GenotypeCounts) -> Result<GenotypeDistribution> {
    if c.n == 0 {
        return Err(Error::EmptySample);
    }
    let n = c.n as f64;
    let probs = c.counts.iter().map(|&x| x as f64 / n).collect();
    Ok(GenotypeDistribution::from_parts_unchecked(c.k, probs))
}

/// `a(i) = p(i,i) + ½ Σ_{j≠i} p(i,j)`.
pub fn allele_distribution(p: &GenotypeDistribution) -> AlleleDistribution {
    AlleleDistribution::from_vec_unchecked(allele_freqs(p.k, &p.probs))
}

/// Allele map on raw triangular entries, with no simplex requirement.
pub(crate) fn allele_freqs(k: usize, q: &[f64]) -> Vec<f64> {
    let mut a = vec![0.0; k];
    for ((i, j), &x) in cells(k).zip(q) {
        if i == j {
            a[i] += x;
        } else {
            a[i] += 0.5 * x;
            a[j] += 0.5 * x;
        }
    }
    a
}

/// HWE genotype distribution: `e(i,i) = a_i²`, `e(i,j) = 2 a_i a_j`.
pub fn hwe_distribution(a: &AlleleDistribution) -> GenotypeDistribution {
    let k = a.k();
    GenotypeDistribution::from_parts_unchecked(k, hwe_cells(&a.freqs))
}

pub(crate) fn hwe_cells(a: &[f64]) -> Vec<f64> {
    cells(a.len())
        .map(|(i, j)| {
            if i == j {
                a[i] * a[i]
            } else {
                2.0 * a[i] * a[j]
            }
        })
        .collect()
}

/// Euclidean distance over the distinct genotype cells.
pub fn l2_distance(p: &GenotypeDistribution, q: &GenotypeDistribution) -> Result<f64> {
    p.check_same_k(q)?;
    Ok(squared_distance(&p.probs, &q.probs).sqrt())
}

pub(crate) fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn vectorize(p: &GenotypeDistribution) -> GenotypeVector {
    GenotypeVector(p.probs.clone())
}

pub fn unvectorize(q: &GenotypeVector) -> Result<GenotypeDistribution> {
    let k = alleles_for_len(q.len()).ok_or(Error::NotTriangular(q.len()))?;
    GenotypeDistribution::new(k, q.0.clone())
}

/// Multinomial covariance `Σ(q) = D_q − q qᵗ`, returned as rows.
pub fn multinomial_covariance(q: &GenotypeVector) -> Vec<Vec<f64>> {
    let q = &q.0;
    (0..q.len())
        .map(|r| {
            (0..q.len())
                .map(|c| {
                    let diag = if r == c { q[r] } else { 0.0 };
                    diag - q[r] * q[c]
                })
                .collect()
        })
        .collect()
}
