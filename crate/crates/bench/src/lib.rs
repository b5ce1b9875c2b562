//! Shared fixtures for the engine benchmarks.

use chiral_core::quasidet::random_block;
use chiral_core::{BlockGrid, DarbouxChain, SpacetimePoint, SuiteConfig};

/// SU(2) chain of depth `k` with evenly spread angles in `(0, pi)`.
pub fn chain(k: usize) -> DarbouxChain {
    let thetas: Vec<f64> = (1..=k)
        .map(|i| std::f64::consts::PI * i as f64 / (k + 1) as f64)
        .collect();
    DarbouxChain::su2(1.0, 1.0, &thetas).expect("angles are away from 0 and pi")
}

pub fn point() -> SpacetimePoint {
    SpacetimePoint::from_tx(0.7, -1.3)
}

/// Random `size x size` grid of `n x n` blocks boxed at the bottom-right.
pub fn block_grid(size: usize, n: usize) -> BlockGrid {
    let mut rng = SuiteConfig::default().rng(0);
    let blocks = (0..size * size)
        .map(|_| random_block(&mut rng, n))
        .collect();
    BlockGrid::new(size, blocks, (size - 1, size - 1)).expect("square grid")
}
