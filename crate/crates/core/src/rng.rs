//! Reproducible random streams and multinomial sampling.
//!
//! Every independent unit of simulation work (a bootstrap replicate, an
//! evaluation point, a Monte-Carlo replicate) gets its own ChaCha8 stream
//! seeded from the master seed and the unit's index path, so results do
//! not depend on scheduling or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp1};

/// Reported in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng(seed_from_u64) keyed by SplitMix64(master, path)";

pub type StreamRng = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Folds an index path into a master seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &i| {
        splitmix64(acc ^ splitmix64(i))
    })
}

pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

/// Multinomial(n, probs) by sequential conditional binomials.
///
/// `probs` must be non-negative; it need not sum to exactly 1, the last
/// cell with positive mass absorbs the remainder so the counts sum to `n`.
pub fn sample_multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let Some(last) = probs.iter().rposition(|&p| p > 0.0) else {
        return out;
    };
    let mut remaining_n = n;
    let mut remaining_mass: f64 = probs[..=last].iter().sum();
    for (cell, &p) in probs[..last].iter().enumerate() {
        if remaining_n == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let frac = (p / remaining_mass).clamp(0.0, 1.0);
        let draw = if frac >= 1.0 {
            remaining_n
        } else {
            Binomial::new(remaining_n, frac)
                .expect("probability clamped to [0, 1]")
                .sample(rng)
        };
        out[cell] = draw;
        remaining_n -= draw;
        remaining_mass -= p;
    }
    out[last] += remaining_n;
    out
}

/// Uniform draw from the simplex, Dirichlet(1, ..., 1).
pub fn uniform_dirichlet<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    x
}
