//! Shared fixtures for the criterion benchmarks.

use lesskit::data::{gen_synthetic, Coherence};
use lesskit::RegressionProblem;

/// A noisy low-coherence least squares problem of the given shape.
pub fn problem(n_rows: usize, d: usize) -> RegressionProblem {
    let ds = gen_synthetic(n_rows, d, Coherence::Low, 1.0, 17).expect("valid shape");
    ds.problem().expect("full rank")
}
