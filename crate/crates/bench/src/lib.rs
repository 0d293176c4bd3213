//! Fixtures shared by the benchmarks.

use ustat_core::simlab::generators::BoxResponse;
use ustat_core::{Dataset, GeneratorSpec};

/// `n` rows from a 2-D uniform box with a linear response plus unit noise.
pub fn box_data(n: usize, seed: u64) -> Dataset {
    GeneratorSpec::UniformBox { d: 2, response: BoxResponse::Linear, sigma: 1.0 }
        .generate(n, seed)
        .expect("valid generator")
}
