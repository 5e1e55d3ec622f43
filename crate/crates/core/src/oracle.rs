//! Exact forward evolution of the law of `W_n`.
//!
//! This is the ground truth for the moment engine: it only uses the sampling
//! kernels and never the moment recurrences.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::kernels::draw_pmf;
use crate::model::{ReplacementMatrix, SamplingModel};
use crate::rational::{frac, int, Rational};

/// Law of `W_n` at a fixed step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDistribution {
    pub step: u64,
    pub total: i64,
    pub mass: BTreeMap<i64, Rational>,
}

impl StateDistribution {
    pub fn point(white: i64, total: i64) -> Self {
        StateDistribution { step: 0, total, mass: BTreeMap::from([(white, Rational::one())]) }
    }

    pub fn total_mass(&self) -> Rational {
        self.mass.values().sum()
    }

    pub fn support(&self) -> (i64, i64) {
        let lo = *self.mass.keys().next().expect("distribution is nonempty");
        let hi = *self.mass.keys().next_back().expect("distribution is nonempty");
        (lo, hi)
    }
}

/// One drawing applied to every state.
///
/// # Panics
///
/// When a transition leaves `0..=T_n`, which means the matrix was not tenable.
pub fn evolve_step(dist: &StateDistribution, matrix: &ReplacementMatrix, model: SamplingModel) -> StateDistribution {
    let m = matrix.m();
    let total = dist.total + matrix.sigma();
    let mut mass: BTreeMap<i64, Rational> = BTreeMap::new();
    for (&w, p) in &dist.mass {
        let pmf = draw_pmf(model, w, dist.total, m)
            .unwrap_or_else(|e| panic!("step {}: state w = {w}: {e}", dist.step + 1));
        for (k, q) in pmf.probabilities().iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let next = w + matrix.white_added(k);
            assert!(
                (0..=total).contains(&next),
                "step {}: W = {w} with {k} white drawn moves to {next}, outside 0..={total}; the urn is not tenable",
                dist.step + 1
            );
            *mass.entry(next).or_insert_with(Rational::zero) += p * q;
        }
    }
    StateDistribution { step: dist.step + 1, total, mass }
}

fn check_initial(matrix: &ReplacementMatrix, w0: i64, b0: i64) -> Result<()> {
    if w0 < 0 || b0 < 0 {
        return Err(Error::Domain(format!("negative initial composition ({w0}, {b0})")));
    }
    if w0 + b0 < matrix.m() as i64 {
        return Err(Error::Domain(format!(
            "initial total {} is smaller than the sample size {}",
            w0 + b0,
            matrix.m()
        )));
    }
    Ok(())
}

/// Distributions at steps `0..=n`.
pub fn evolve_all(
    matrix: &ReplacementMatrix,
    model: SamplingModel,
    w0: i64,
    b0: i64,
    n: usize,
) -> Result<Vec<StateDistribution>> {
    check_initial(matrix, w0, b0)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(StateDistribution::point(w0, w0 + b0));
    for _ in 0..n {
        let next = evolve_step(out.last().expect("nonempty"), matrix, model);
        out.push(next);
    }
    Ok(out)
}

pub fn evolve(matrix: &ReplacementMatrix, model: SamplingModel, w0: i64, b0: i64, n: usize) -> Result<StateDistribution> {
    check_initial(matrix, w0, b0)?;
    let mut dist = StateDistribution::point(w0, w0 + b0);
    for _ in 0..n {
        dist = evolve_step(&dist, matrix, model);
    }
    Ok(dist)
}

/// `(sum w p_w, sum w^2 p_w)`.
pub fn oracle_moments(dist: &StateDistribution) -> (Rational, Rational) {
    let mut mean = Rational::zero();
    let mut second = Rational::zero();
    for (&w, p) in &dist.mass {
        let w = int(w);
        mean += p * &w;
        second += p * &w * &w;
    }
    (mean, second)
}

/// A state at which the one-step conditional mean breaks the affine relation
/// or the martingale identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub w: i64,
    pub conditional_mean: Rational,
    pub expected: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalMeanOutcome {
    pub holds: bool,
    /// Whether the martingale identity was checked (requires `T_0 + m(a_{m-1}-a_m) > 0`).
    pub martingale_checked: bool,
    pub witness: Option<Witness>,
}

/// `E[W_n | W_{n-1} = w]` by summing over the sample composition.
pub fn conditional_mean(matrix: &ReplacementMatrix, model: SamplingModel, w: i64, total: i64) -> Result<Rational> {
    let pmf = draw_pmf(model, w, total, matrix.m())?;
    Ok(pmf
        .probabilities()
        .iter()
        .enumerate()
        .map(|(k, p)| p * int(w + matrix.white_added(k)))
        .sum())
}

/// Checks, at every state `w` charged by `dist` (the law at step `n - 1`):
///
/// * `E[W_n | W_{n-1} = w] = (T + m(a_{m-1} - a_m))/T * w + a_m`, and
/// * `E[g_n (W_n - E W_n) | W_{n-1} = w] = g_{n-1} (w - E W_{n-1})`.
///
/// `g` and the unconditional means are rebuilt from their definitions here, so the
/// check stays independent of the moment engine. `t0` is the initial total.
pub fn conditional_mean_check(
    matrix: &ReplacementMatrix,
    model: SamplingModel,
    dist: &StateDistribution,
    t0: i64,
) -> Result<ConditionalMeanOutcome> {
    let m = matrix.m() as i64;
    let (am1, am) = (matrix.a_k(matrix.m() - 1), matrix.a_k(matrix.m()));
    let shift = m * (am1 - am);
    let t = dist.total;
    let alpha = frac(t + shift, t);

    let mut conditional = Vec::with_capacity(dist.mass.len());
    for &w in dist.mass.keys() {
        let cm = conditional_mean(matrix, model, w, t)?;
        let expected = &alpha * int(w) + int(am);
        if cm != expected {
            return Ok(ConditionalMeanOutcome {
                holds: false,
                martingale_checked: false,
                witness: Some(Witness { w, conditional_mean: cm, expected }),
            });
        }
        conditional.push((w, cm));
    }

    if t0 + shift <= 0 {
        return Ok(ConditionalMeanOutcome { holds: true, martingale_checked: false, witness: None });
    }
    let sigma = matrix.sigma();
    let steps = dist.step as i64;
    let g_prev: Rational = (0..steps).map(|j| frac(t0 + sigma * j, t0 + sigma * j + shift)).product();
    let g_next = &g_prev * frac(t, t + shift);
    let (mean_prev, _) = oracle_moments(dist);
    let mean_next: Rational = dist.mass.values().zip(&conditional).map(|(p, (_, cm))| p * cm).sum();
    for (w, cm) in conditional {
        let lhs = &g_next * (&cm - &mean_next);
        let rhs = &g_prev * (int(w) - &mean_prev);
        if lhs != rhs {
            return Ok(ConditionalMeanOutcome {
                holds: false,
                martingale_checked: true,
                witness: Some(Witness { w, conditional_mean: lhs, expected: rhs }),
            });
        }
    }
    Ok(ConditionalMeanOutcome { holds: true, martingale_checked: true, witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(a: &[i64], sigma: i64) -> ReplacementMatrix {
        ReplacementMatrix::new(a.to_vec(), sigma).unwrap()
    }

    #[test]
    fn classic_polya_is_uniform() {
        // m = 1, a = (1, 0): drawing white adds a white ball
        let polya = mat(&[1, 0], 1);
        for model in SamplingModel::ALL {
            let d = evolve(&polya, model, 1, 1, 2).unwrap();
            assert_eq!(d.mass, BTreeMap::from([(1, frac(1, 3)), (2, frac(1, 3)), (3, frac(1, 3))]));
            let d = evolve(&polya, model, 1, 1, 10).unwrap();
            assert!(d.mass.values().all(|p| *p == frac(1, 11)));
            assert_eq!(oracle_moments(&d).0, int(6));
        }
    }

    #[test]
    fn moment_examples() {
        assert_eq!(oracle_moments(&StateDistribution::point(4, 9)), (int(4), int(16)));
        let uniform = StateDistribution {
            step: 2,
            total: 4,
            mass: BTreeMap::from([(1, frac(1, 3)), (2, frac(1, 3)), (3, frac(1, 3))]),
        };
        assert_eq!(oracle_moments(&uniform), (int(2), frac(14, 3)));
    }

    #[test]
    fn degenerate_urn_is_deterministic() {
        let deg = mat(&[2, 2, 2, 2], 3);
        for model in SamplingModel::ALL {
            let d = evolve(&deg, model, 5, 3, 4).unwrap();
            assert_eq!(d.mass, BTreeMap::from([(13, Rational::one())]));
            for dist in evolve_all(&deg, model, 5, 3, 4).unwrap() {
                let out = conditional_mean_check(&deg, model, &dist, 8).unwrap();
                assert!(out.holds && out.martingale_checked);
            }
        }
    }

    #[test]
    fn mass_conservation_and_support() {
        for model in SamplingModel::ALL {
            let matrix = mat(&[-1, 0, 1], 1);
            let all = evolve_all(&matrix, model, 2, 2, 8).unwrap();
            let (lo_step, hi_step) = (matrix.a().iter().min().copied().unwrap(), matrix.a().iter().max().copied().unwrap());
            for pair in all.windows(2) {
                assert!(pair[1].total_mass().is_one());
                let (lo0, hi0) = pair[0].support();
                let (lo1, hi1) = pair[1].support();
                assert!(lo1 >= (lo0 + lo_step).max(0));
                assert!(hi1 <= (hi0 + hi_step).min(pair[1].total));
            }
        }
    }

    #[test]
    fn support_moves_by_extreme_offsets() {
        // critical urn: each step adds 1, 2 or 3 white balls and every sample is possible
        let matrix = mat(&[3, 2, 1], 4);
        for model in SamplingModel::ALL {
            let all = evolve_all(&matrix, model, 2, 2, 6).unwrap();
            for (n, d) in all.iter().enumerate() {
                assert_eq!(d.support(), (2 + n as i64, 2 + 3 * n as i64));
            }
        }
    }

    #[test]
    fn models_coincide_for_single_draw() {
        let matrix = mat(&[-1, 2], 2);
        let r = evolve_all(&matrix, SamplingModel::WithReplacement, 2, 3, 7).unwrap();
        let m = evolve_all(&matrix, SamplingModel::WithoutReplacement, 2, 3, 7).unwrap();
        assert_eq!(r, m);
    }

    #[test]
    fn nonaffine_has_witness() {
        let matrix = mat(&[1, 0, 2], 2);
        for model in SamplingModel::ALL {
            let d = evolve(&matrix, model, 2, 2, 1).unwrap();
            let out = conditional_mean_check(&matrix, model, &d, 4).unwrap();
            assert!(!out.holds);
            let witness = out.witness.unwrap();
            assert_ne!(witness.conditional_mean, witness.expected);
        }
    }

    #[test]
    fn martingale_holds_on_affine_urns() {
        for (a, sigma, w0, b0) in [(vec![3, 2, 1], 4, 2, 2), (vec![7, 5, 3, 1], 8, 4, 4), (vec![2, 1, 0], 2, 1, 2)] {
            let matrix = mat(&a, sigma);
            for model in SamplingModel::ALL {
                for d in evolve_all(&matrix, model, w0, b0, 5).unwrap() {
                    let out = conditional_mean_check(&matrix, model, &d, w0 + b0).unwrap();
                    assert!(out.holds && out.martingale_checked, "{matrix} {model} step {}", d.step);
                }
            }
        }
    }

    #[test]
    fn restart_urn_checks_affine_relation_only() {
        let friedman = mat(&[0, 1, 2], 2);
        let d = evolve(&friedman, SamplingModel::WithReplacement, 1, 1, 2).unwrap();
        let out = conditional_mean_check(&friedman, SamplingModel::WithReplacement, &d, 2).unwrap();
        assert!(out.holds);
        assert!(!out.martingale_checked);
    }

    #[test]
    #[should_panic(expected = "not tenable")]
    fn untenable_transition_panics() {
        let bad = mat(&[-3, 0, 1], 1);
        let _ = evolve(&bad, SamplingModel::WithoutReplacement, 2, 1, 1);
    }

    #[test]
    fn rejects_small_initial_urn() {
        assert!(evolve(&mat(&[1, 1, 1], 3), SamplingModel::WithoutReplacement, 1, 0, 1).is_err());
    }
}
