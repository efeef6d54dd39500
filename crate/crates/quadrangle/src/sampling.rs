//! Seeded random variables for property checks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rv::DiscreteRv;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random probability vector with entries bounded away from zero.
pub fn random_probs<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| 0.05 + rng.gen::<f64>()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Random values in `[lo, hi)` on a fixed scenario space.
pub fn random_values<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect()
}

pub fn random_rv<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> DiscreteRv {
    let p = random_probs(rng, n);
    let v = random_values(rng, n, lo, hi);
    DiscreteRv::from_scenarios(&v, &p)
}

/// A batch of random variables with 2 to `max_atoms` atoms.
pub fn random_batch(seed: u64, count: usize, max_atoms: usize, lo: f64, hi: f64) -> Vec<DiscreteRv> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.gen_range(2..=max_atoms.max(2));
            random_rv(&mut r, n, lo, hi)
        })
        .collect()
}

/// Pairs of random variables living on one scenario space.
pub fn random_pairs(seed: u64, count: usize, n: usize, lo: f64, hi: f64) -> Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let p = random_probs(&mut r, n);
            let x = random_values(&mut r, n, lo, hi);
            let y = random_values(&mut r, n, lo, hi);
            (p, x, y)
        })
        .collect()
}
