//! Shared fixtures for the throughput benchmarks.

use quoin_core::quantum::QuoinBias;

/// Biases exercised by the benchmarks, spanning the degenerate and generic
/// regimes.
pub fn bench_biases() -> Vec<QuoinBias> {
    [0.0, 0.3, 0.5]
        .into_iter()
        .map(|p| QuoinBias::new(p).expect("valid bias"))
        .collect()
}
