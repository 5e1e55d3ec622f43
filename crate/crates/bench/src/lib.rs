//! Fixtures shared by the benchmarks.

use multidraw::{AffineParams, SamplingModel, SimulationConfig};

/// `m = 3`, `a = (7, 5, 3, 1)`, `sigma = 8`: the large-index urn.
pub fn large_index() -> AffineParams {
    AffineParams::new(3, 3, 1, 8).expect("valid parameters")
}

/// `m = 2`, `a = (3, 2, 1)`, `sigma = 4`: the critical urn.
pub fn critical() -> AffineParams {
    AffineParams::new(2, 2, 1, 4).expect("valid parameters")
}

pub fn simulation(params: &AffineParams, model: SamplingModel, n_steps: u64, replicates: u64) -> SimulationConfig {
    let half = params.m as i64 + 1;
    let mut cfg = SimulationConfig::new(params.matrix(), model, half, half, n_steps);
    cfg.replicates = replicates;
    cfg
}
