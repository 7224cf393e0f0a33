//! Fixtures shared by the benchmarks.

use orbitlab_core::check::{sample_pairs, PairSample};
use orbitlab_core::{MetricSpace, SelfMap};

/// The unit interval on a grid of `resolution` points with `x ↦ x²/2` and
/// its default pair sample.
pub fn square_half(resolution: usize) -> (MetricSpace, SelfMap, PairSample) {
    let space = MetricSpace::interval(0.0, 1.0, resolution).expect("valid grid");
    let pairs = sample_pairs(&space, 0);
    (space, SelfMap::SquareHalf, pairs)
}

/// The harmonic space truncated at `truncation` with the successor map and
/// the pairs `(n, n+1)` for `n ≤ pairs`.
pub fn successor(truncation: u64, pairs: u64) -> (MetricSpace, SelfMap, PairSample) {
    let space = MetricSpace::harmonic(truncation).expect("valid truncation");
    (space, SelfMap::successor(truncation), PairSample::successive_naturals(1, pairs))
}
