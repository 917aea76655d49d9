//! Shared fixtures for the criterion benchmarks.

use lognlogs::{generate, BrokenParetoParams, Dataset, PerSource, SimSetting};

/// The two-piece experimental preset at an arbitrary size.
pub fn two_piece_dataset(n: usize, seed: u64) -> Dataset {
    let setting = SimSetting {
        params: two_piece_params(),
        n,
        area: PerSource::Constant(1e19),
        background: PerSource::Constant(10.0),
        seed,
    };
    generate(&setting).unwrap().into_dataset()
}

pub fn two_piece_params() -> BrokenParetoParams {
    BrokenParetoParams::new(vec![0.5, 3.0], vec![1e-17, 5e-17]).unwrap()
}
