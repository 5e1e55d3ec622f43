//! Exact rational moments of `W_n` for affine urns.
//!
//! The recurrences are the primary path:
//!
//! * `E[W_n] = (T_{n-1} + mD) / T_{n-1} * E[W_{n-1}] + a_m`
//! * `E[W_n^2] = alpha_n E[W_{n-1}^2] + beta_n E[W_{n-1}] + a_m^2`
//!
//! with `D = a_{m-1} - a_m`. Closed forms and root factorisations are
//! cross-checks.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{AffineParams, SamplingModel};
use crate::rational::{frac, int, sqrt_approx, to_f64, Rational};

/// Checks `W0 + B0 >= m` and `0 <= W0 <= T0`.
pub fn check_start(params: &AffineParams, t0: i64, w0: i64) -> Result<()> {
    if t0 < params.m as i64 {
        return Err(Error::Domain(format!(
            "initial total T0 = {t0} is smaller than the sample size m = {}",
            params.m
        )));
    }
    if w0 < 0 || w0 > t0 {
        return Err(Error::Domain(format!("W0 = {w0} must lie in 0..={t0}")));
    }
    Ok(())
}

/// Fails with [`Error::RestartRequired`] unless `T0 + m(a_{m-1} - a_m) > 0`.
pub fn check_positivity(params: &AffineParams, t0: i64) -> Result<()> {
    let value = t0 + params.shift();
    if value <= 0 {
        return Err(Error::RestartRequired { value });
    }
    Ok(())
}

/// `g_n = prod_{j<n} T_j / (T_j + m(a_{m-1} - a_m))` for `n = 0..=n_max`.
pub fn g_sequence(params: &AffineParams, t0: i64, n_max: usize) -> Result<Vec<Rational>> {
    check_positivity(params, t0)?;
    let mut g = Vec::with_capacity(n_max + 1);
    let mut current = Rational::one();
    g.push(current.clone());
    for j in 0..n_max as i64 {
        let t = t0 + params.sigma * j;
        current *= frac(t, t + params.shift());
        g.push(current.clone());
    }
    Ok(g)
}

/// `E[W_n]` for `n = 0..=n_max` by the linear recurrence.
///
/// The recurrence itself does not need `g_n`, so it is valid even when the
/// positivity condition fails (the factor `alpha_n` may then vanish).
pub fn expected_value_exact(params: &AffineParams, t0: i64, w0: i64, n_max: usize) -> Result<Vec<Rational>> {
    check_start(params, t0, w0)?;
    let am = int(params.a_m);
    let mut mean = Vec::with_capacity(n_max + 1);
    let mut e = int(w0);
    mean.push(e.clone());
    for n in 1..=n_max as i64 {
        let t = t0 + params.sigma * (n - 1);
        e = e * frac(t + params.shift(), t) + &am;
        mean.push(e.clone());
    }
    Ok(mean)
}

/// `E[W_n] = (a_m sum_{j=1..n} g_j + W0) / g_n`.
pub fn expected_value_from_g(params: &AffineParams, w0: i64, g: &[Rational]) -> Vec<Rational> {
    let am = int(params.a_m);
    let mut acc = int(w0);
    let mut out = Vec::with_capacity(g.len());
    for (n, gn) in g.iter().enumerate() {
        if n > 0 {
            acc += &am * gn;
        }
        out.push(&acc / gn);
    }
    out
}

/// The closed form
/// `E[W_n] = a_m (n + T0/s)/(1 - L) + (W0 - (a_m T0/s)/(1 - L)) prod_{i<n} (T0 + mD + s i)/(T0 + s i)`
/// valid for `L < 1`. The product is the Gamma-function ratio
/// `Gamma(n + T0/s + L) Gamma(T0/s) / (Gamma(n + T0/s) Gamma(T0/s + L))` written out.
/// At `L = 1` (then `a_m = b_0 = 0`) the linear part vanishes and the product
/// telescopes to `W0 (n s + T0) / T0`.
pub fn expected_value_closed_form(params: &AffineParams, t0: i64, w0: i64, n: usize) -> Result<Rational> {
    check_start(params, t0, w0)?;
    let lambda = &params.lambda;
    let product = || {
        let mut product = Rational::one();
        for i in 0..n as i64 {
            let t = t0 + params.sigma * i;
            product *= frac(t + params.shift(), t);
        }
        product
    };
    if lambda.is_one() && params.a_m == 0 {
        return Ok(int(w0) * product());
    }
    if *lambda >= Rational::one() {
        return Err(Error::Unsupported(format!(
            "closed form needs index < 1 (or index 1 with a_m = 0), got {lambda}; use the recurrence"
        )));
    }
    let one_minus = Rational::one() - lambda;
    let sigma = int(params.sigma);
    let am = int(params.a_m);
    let t0_over = int(t0) / &sigma;
    let linear = &am * (int(n as i64) + &t0_over) / &one_minus;
    let coefficient = int(w0) - &am * &t0_over / &one_minus;
    Ok(linear + coefficient * product())
}

/// The pair of roots `centre +- coeff * sqrt(radicand)` in the factorisation of `alpha_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootPair {
    pub centre: Rational,
    pub coeff: Rational,
    pub radicand: Rational,
}

impl RootPair {
    /// Both roots as rationals when the radicand is a perfect square.
    pub fn exact(&self) -> Option<(Rational, Rational)> {
        let s = crate::rational::exact_sqrt(&self.radicand)?;
        let half = &self.coeff * s;
        Some((&self.centre + &half, &self.centre - &half))
    }

    /// Rational approximations of the roots accurate to about `digits` digits.
    pub fn approx(&self, digits: u32) -> (Rational, Rational) {
        if let Some(r) = self.exact() {
            return r;
        }
        let half = &self.coeff * sqrt_approx(&self.radicand, digits);
        (&self.centre + &half, &self.centre - &half)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        let half = to_f64(&self.coeff) * to_f64(&self.radicand).sqrt();
        let c = to_f64(&self.centre);
        (c + half, c - half)
    }
}

/// Coefficients of the second-moment recurrence for one urn and model.
#[derive(Debug, Clone)]
pub struct SecondMomentParams {
    pub model: SamplingModel,
    pub m: i64,
    pub delta: i64,
    pub a_m: i64,
    pub sigma: i64,
    pub t0: i64,
}

impl SecondMomentParams {
    pub fn new(params: &AffineParams, model: SamplingModel, t0: i64) -> Self {
        SecondMomentParams {
            model,
            m: params.m as i64,
            delta: params.delta(),
            a_m: params.a_m,
            sigma: params.sigma,
            t0,
        }
    }

    fn total_before(&self, n: usize) -> i64 {
        self.t0 + self.sigma * (n as i64 - 1)
    }

    /// `m(m-1) / T^(2)` (model M) or `m(m-1) / T^2` (model R), with `T = T_{n-1}`.
    fn pair_factor(&self, t: i64) -> Result<Rational> {
        let pairs = self.m * (self.m - 1);
        if pairs == 0 {
            return Ok(Rational::zero());
        }
        match self.model {
            SamplingModel::WithoutReplacement => {
                if t < 2 {
                    return Err(Error::Domain(format!("falling factorial T^(2) vanishes at T = {t}")));
                }
                Ok(frac(pairs, t * (t - 1)))
            }
            SamplingModel::WithReplacement => Ok(Rational::new(BigInt::from(pairs), BigInt::from(t) * t)),
        }
    }

    /// `alpha_n = 1 + D^2 m(m-1)/T^(2) + 2Dm/T` (model M; `T^2` for model R).
    pub fn alpha(&self, n: usize) -> Result<Rational> {
        let t = self.total_before(n);
        let d = int(self.delta);
        Ok(Rational::one() + &d * &d * self.pair_factor(t)? + frac(2 * self.delta * self.m, t))
    }

    /// `beta_n = D^2 (m/T - m(m-1)/T^(2)) + 2 m a_m D / T + 2 a_m` (model M);
    /// `beta_n = D^2 m / T + 2 m a_m D / T + 2 a_m` (model R).
    pub fn beta(&self, n: usize) -> Result<Rational> {
        let t = self.total_before(n);
        let d = int(self.delta);
        let single = frac(self.m, t);
        let spread = match self.model {
            SamplingModel::WithoutReplacement => single - self.pair_factor(t)?,
            SamplingModel::WithReplacement => single,
        };
        Ok(&d * &d * spread + frac(2 * self.m * self.a_m * self.delta, t) + int(2 * self.a_m))
    }

    pub fn gamma(&self) -> Rational {
        int(self.a_m * self.a_m)
    }

    /// `lambda_{1,2}` (model M) or `mu_{1,2}` (model R).
    pub fn roots(&self) -> RootPair {
        let s = int(self.sigma);
        let base = int(self.m * self.delta + self.t0);
        match self.model {
            SamplingModel::WithoutReplacement => RootPair {
                centre: (base - frac(1, 2)) / &s,
                coeff: Rational::one() / (int(2) * &s),
                radicand: int(1 + 4 * self.m * self.delta * (self.delta + 1)),
            },
            SamplingModel::WithReplacement => RootPair {
                centre: base / &s,
                coeff: int(self.delta) / &s,
                radicand: int(self.m),
            },
        }
    }

    /// The two denominator offsets: `(T0/s, (T0-1)/s)` for model M, `(T0/s, T0/s)` for model R.
    pub fn denominator_offsets(&self) -> (Rational, Rational) {
        let first = frac(self.t0, self.sigma);
        match self.model {
            SamplingModel::WithoutReplacement => (first, frac(self.t0 - 1, self.sigma)),
            SamplingModel::WithReplacement => (first.clone(), first),
        }
    }

    /// `alpha_n` as `(n-1+r1)(n-1+r2) / ((n-1+d1)(n-1+d2))` with the given roots.
    pub fn alpha_factored(&self, n: usize, roots: &(Rational, Rational)) -> Rational {
        let x = int(n as i64 - 1);
        let (d1, d2) = self.denominator_offsets();
        (&x + &roots.0) * (&x + &roots.1) / ((&x + d1) * (&x + d2))
    }

    /// The constant `M` in `psi_n = n^{2L}(1 + M/n + ...)` from the model-specific
    /// root expression, using roots accurate to `digits` digits.
    pub fn psi_constant_from_roots(&self, digits: u32) -> Rational {
        let (r1, r2) = self.roots().approx(digits);
        let (d1, d2) = self.denominator_offsets();
        let sq = |x: &Rational| x * x - x;
        (sq(&r1) + sq(&r2) - sq(&d1) - sq(&d2)) / int(2)
    }
}

/// `M = L^2 - L + L^2/m + 2 L T0/s`.
pub fn psi_constant(params: &AffineParams, t0: i64) -> Rational {
    let l = &params.lambda;
    l * l - l + l * l / int(params.m as i64) + int(2) * l * frac(t0, params.sigma)
}

/// `E[W_n^2]` for `n = 0..=n_max`, given the exact means.
pub fn second_moment_from_mean(
    params: &AffineParams,
    model: SamplingModel,
    t0: i64,
    mean: &[Rational],
) -> Result<Vec<Rational>> {
    let sm = SecondMomentParams::new(params, model, t0);
    let gamma = sm.gamma();
    let mut out = Vec::with_capacity(mean.len());
    let mut s = match mean.first() {
        Some(w0) => w0 * w0,
        None => return Ok(out),
    };
    out.push(s.clone());
    for n in 1..mean.len() {
        s = sm.alpha(n)? * s + sm.beta(n)? * &mean[n - 1] + &gamma;
        out.push(s.clone());
    }
    Ok(out)
}

pub fn second_moment_exact(
    params: &AffineParams,
    model: SamplingModel,
    t0: i64,
    w0: i64,
    n_max: usize,
) -> Result<Vec<Rational>> {
    let mean = expected_value_exact(params, t0, w0, n_max)?;
    second_moment_from_mean(params, model, t0, &mean)
}

/// `E[W_n^2] - E[W_n]^2`.
///
/// # Panics
///
/// On a negative entry, which can only come from an inconsistent recurrence.
pub fn variance_exact(mean: &[Rational], second: &[Rational]) -> Vec<Rational> {
    assert_eq!(mean.len(), second.len(), "mean and second-moment series differ in length");
    mean.iter()
        .zip(second)
        .enumerate()
        .map(|(n, (e, s))| {
            let v = s - e * e;
            assert!(!v.is_negative(), "negative variance {v} at n = {n}: moment recurrences are inconsistent");
            v
        })
        .collect()
}

/// Exact moment series of `W_n` for `n = 0..=n_max`.
#[derive(Debug, Clone)]
pub struct ExactMomentSeries {
    pub model: SamplingModel,
    pub params: AffineParams,
    pub t0: i64,
    pub w0: i64,
    pub mean: Vec<Rational>,
    pub second: Vec<Rational>,
    pub variance: Vec<Rational>,
    /// `None` when `T0 + m(a_{m-1} - a_m) <= 0`.
    pub g: Option<Vec<Rational>>,
}

impl ExactMomentSeries {
    pub fn compute(params: &AffineParams, model: SamplingModel, t0: i64, w0: i64, n_max: usize) -> Result<Self> {
        let mean = expected_value_exact(params, t0, w0, n_max)?;
        let second = second_moment_from_mean(params, model, t0, &mean)?;
        let variance = variance_exact(&mean, &second);
        let g = g_sequence(params, t0, n_max).ok();
        Ok(ExactMomentSeries { model, params: params.clone(), t0, w0, mean, second, variance, g })
    }

    pub fn n_max(&self) -> usize {
        self.mean.len() - 1
    }

    /// `g_n E[W_n] - a_m sum_{j<=n} g_j - W0`, which vanishes identically.
    pub fn martingale_mean_defect(&self) -> Option<Vec<Rational>> {
        let g = self.g.as_ref()?;
        let am = int(self.params.a_m);
        let mut acc = Rational::zero();
        Some(
            g.iter()
                .zip(&self.mean)
                .enumerate()
                .map(|(n, (gn, e))| {
                    if n > 0 {
                        acc += &am * gn;
                    }
                    gn * e - &acc - int(self.w0)
                })
                .collect(),
        )
    }
}
