//! Balanced two-colour Pólya urns with multiple drawings.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod export;
pub mod kernels;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod rational;
pub mod rng;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
pub use kernels::{binomial_pmf, draw_pmf, hypergeometric_pmf, moments_of_draw, sample_draw, DrawDistribution, DrawSampler};
pub use model::{
    check_affinity, classify, conditional_coefficients, identify_family, index, validate_tenability, AffineParams,
    Affinity, Family, IndexClass, Regime, ReplacementMatrix, SamplingModel, TenabilityReport, UrnState,
};
pub use rational::Rational;
pub use asymptotics::{large_index_constant, variance_asymptotic, LargeIndexConstant, VarianceAsymptotic};
pub use exact::{expected_value_closed_form, expected_value_exact, second_moment_exact, ExactMomentSeries};
pub use numeric::NumericSeries;
pub use oracle::{conditional_mean_check, evolve, oracle_moments, StateDistribution};
pub use simulate::{run, Checkpoints, RecordOptions, SimulationConfig, SimulationOutput};
pub use verify::{check_l2_convergence, check_ratio_convergence, ks_statistic, verify_battery, verify_clt, VerificationReport};
