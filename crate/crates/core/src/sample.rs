//! Seeded random inputs shared by the checks and the experiment runner.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{cell_count, GridFunction};
use crate::weights::Weight;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cell values uniform in `[-1, 1)`.
pub fn random_grid(dim: usize, depth: usize, seed: u64) -> GridFunction {
    let mut r = rng(seed);
    let values = (0..cell_count(dim, depth))
        .map(|_| r.random_range(-1.0..1.0))
        .collect();
    GridFunction::new(dim, depth, values).expect("count matches")
}

/// Cell values `exp(u)` with `u` uniform in `[-spread, spread)`.
pub fn random_weight_with(dim: usize, depth: usize, seed: u64, spread: f64) -> Weight {
    let mut r = rng(seed);
    let values: Vec<f64> = (0..cell_count(dim, depth))
        .map(|_| libm::exp(r.random_range(-spread..spread)))
        .collect();
    Weight::new(GridFunction::new(dim, depth, values).expect("count matches")).expect("positive")
}

pub fn random_weight(dim: usize, depth: usize, seed: u64) -> Weight {
    random_weight_with(dim, depth, seed, 1.5)
}

/// `count` independent `+1`/`-1` signs.
pub fn random_signs(count: usize, seed: u64) -> Vec<i8> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| if r.random::<bool>() { 1 } else { -1 })
        .collect()
}
