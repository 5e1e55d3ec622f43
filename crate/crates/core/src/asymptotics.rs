//! Leading-order behaviour of the mean and variance of `W_n`.
//!
//! With `L` the urn index:
//!
//! * `L < 1/2`: `V[W_n] ~ a_m b_0 L^2 / (m (1 - 2L)(1 - L)^2) n`
//! * `L = 1/2`: `V[W_n] ~ a_m b_0 / m n ln n`
//! * `1/2 < L < 1`: `V[W_n] ~ C n^{2L}` with a model-dependent series `C`.

use num_traits::{One, Zero};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::exact::{psi_constant, SecondMomentParams};
use crate::model::{classify, AffineParams, IndexClass, Regime, SamplingModel};
use crate::rational::{binomial, frac, int, to_f64, Rational};

/// Bernoulli numbers `B_0..=B_n` with `B_1 = -1/2`.
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    b.push(Rational::one());
    for k in 1..=n {
        let s: Rational = (0..k).map(|j| Rational::from(binomial(k as i64 + 1, j as i64)) * &b[j]).sum();
        b.push(-s / int(k as i64 + 1));
    }
    b
}

/// Riemann zeta function for real `s != 1`, absolute error about `tolerance`.
///
/// Euler–Maclaurin summation:
/// `zeta(s) = sum_{j<N} j^-s + N^{1-s}/(s-1) + N^-s/2 + sum_k B_2k/(2k)! s(s+1)..(s+2k-2) N^{-s-2k+1}`,
/// which is the analytic continuation for every `s != 1`. For `s < 0` the
/// head and the `N^{1-s}` term cancel badly, so the reflection formula
/// `zeta(s) = 2^s pi^{s-1} sin(pi s / 2) Gamma(1 - s) zeta(1 - s)` is used instead.
pub fn zeta_with_tolerance(s: f64, tolerance: f64) -> Result<f64> {
    if (s - 1.0).abs() < 1e-12 {
        return Err(Error::Pole);
    }
    if !s.is_finite() {
        return Err(Error::Domain(format!("zeta argument {s} is not finite")));
    }
    if s < 0.0 {
        if s == s.round() && (s as i64) % 2 == 0 {
            return Ok(0.0);
        }
        let pi = std::f64::consts::PI;
        let reflected = zeta_with_tolerance(1.0 - s, tolerance)?;
        return Ok(2f64.powf(s) * pi.powf(s - 1.0) * (pi * s / 2.0).sin() * gamma(1.0 - s) * reflected);
    }
    const TERMS: usize = 30;
    let bernoulli: Vec<f64> = bernoulli_numbers(2 * TERMS).iter().map(to_f64).collect();
    let mut n_terms = 16usize.max((s.abs() * 2.0) as usize);
    loop {
        let n = n_terms as f64;
        let head: f64 = (1..n_terms).map(|j| (j as f64).powf(-s)).sum();
        let mut total = head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
        // rising = s (s+1) ... (s+2k-2) / (2k)!, power = N^{-s-2k+1}
        let mut rising = s / 2.0;
        let mut power = n.powf(-s - 1.0);
        let mut converged = false;
        for k in 1..=TERMS {
            let term = bernoulli[2 * k] * rising * power;
            total += term;
            if term.abs() <= tolerance * total.abs().max(1.0) * 1e-2 {
                converged = true;
                break;
            }
            let (a, b) = (s + 2.0 * k as f64 - 1.0, s + 2.0 * k as f64);
            rising *= a * b / ((2 * k + 1) as f64 * (2 * k + 2) as f64);
            power /= n * n;
        }
        if converged || n_terms > 1 << 16 {
            return Ok(total);
        }
        n_terms *= 2;
    }
}

pub fn zeta(s: f64) -> Result<f64> {
    zeta_with_tolerance(s, 1e-15)
}

/// `Gamma(a) / Gamma(b)`, via log-Gamma when both arguments are positive.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    let is_pole = |x: f64| x <= 0.0 && x == x.round();
    if is_pole(b) {
        return Err(Error::Domain(format!("Gamma({b}) is infinite")));
    }
    if is_pole(a) {
        return Ok(0.0);
    }
    if a > 0.0 && b > 0.0 {
        Ok((ln_gamma(a) - ln_gamma(b)).exp())
    } else {
        Ok(gamma(a) / gamma(b))
    }
}

/// Constants of the expansions
/// `E[W_n] = E1 n + E2 n^L + E3 + O(n^{L-1})`, `beta_n = B1 + B2/n + O(n^-2)`,
/// `psi_n = n^{2L}(1 + M/n + O(n^-2))`, and `Q = Gamma(T0/s + L)/Gamma(T0/s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionConstants {
    pub lambda: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub b1: f64,
    pub b2: f64,
    pub m_const: f64,
    pub q: f64,
}

impl ExpansionConstants {
    /// Requires `L < 1`.
    pub fn new(params: &AffineParams, t0: i64, w0: i64) -> Result<Self> {
        if params.lambda >= Rational::one() {
            return Err(Error::Unsupported(format!("expansions need index < 1, got {}", params.lambda)));
        }
        let lambda = params.lambda_f64();
        let am = params.a_m as f64;
        let x0 = t0 as f64 / params.sigma as f64;
        let one_minus = to_f64(&(Rational::one() - &params.lambda));
        let e1 = am / one_minus;
        let e3 = x0 * am / one_minus;
        let inv_q = gamma_ratio(x0, x0 + lambda)?;
        let e2 = (w0 as f64 - e3) * inv_q;
        let q = gamma_ratio(x0 + lambda, x0).unwrap_or(f64::INFINITY);
        Ok(ExpansionConstants {
            lambda,
            e1,
            e2,
            e3,
            b1: 2.0 * am,
            b2: lambda * (params.a_m_minus_1 + params.a_m) as f64,
            m_const: to_f64(&psi_constant(params, t0)),
            q,
        })
    }

    /// Coefficient of `j^{-2L}` in the expansion of `(beta_j E[W_{j-1}] + a_m^2) / psi_j`.
    pub fn k2(&self, a_m: f64) -> f64 {
        a_m * a_m + self.b1 * self.e3 + self.e1 * self.b2 - self.b1 * self.e1 - self.b1 * self.e1 * self.m_const
    }
}

/// `E1 n + E2 n^L + E3`; exact `W0 + c n` for degenerate urns.
pub fn mean_asymptotic(params: &AffineParams, t0: i64, w0: i64, n: f64) -> Result<f64> {
    if params.lambda.is_zero() {
        return Ok(w0 as f64 + params.a_m as f64 * n);
    }
    if params.a_m == 0 {
        return Err(Error::Unsupported("mean expansion excludes urns with a_m = 0".into()));
    }
    let c = ExpansionConstants::new(params, t0, w0)?;
    Ok(c.e1 * n + c.e2 * n.powf(c.lambda) + c.e3)
}

/// `a_m b_0 L^2 / (m (1 - 2L)(1 - L)^2)`.
pub fn small_index_slope(params: &AffineParams) -> Result<Rational> {
    let l = &params.lambda;
    let one = Rational::one();
    if *l >= frac(1, 2) {
        return Err(Error::Unsupported(format!("slope formula needs index < 1/2, got {l}")));
    }
    let one_minus = &one - l;
    Ok(int(params.a_m * params.b0) * l * l
        / (int(params.m as i64) * (&one - int(2) * l) * &one_minus * &one_minus))
}

/// `a_m b_0 / m`.
pub fn critical_coefficient(params: &AffineParams) -> Rational {
    frac(params.a_m * params.b0, params.m as i64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeadingShape {
    /// Variance identically zero.
    Zero,
    Linear,
    NLogN,
    Power { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeIndexConstant {
    pub c: f64,
    pub truncation_bound: f64,
    /// Number of series terms summed before the tail estimate.
    pub terms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceAsymptotic {
    pub class: IndexClass,
    pub shape: LeadingShape,
    pub leading_coefficient: f64,
    pub constant_c: Option<LargeIndexConstant>,
}

impl VarianceAsymptotic {
    /// Leading-order prediction of `V[W_n]`.
    pub fn predict(&self, n: f64) -> f64 {
        match self.shape {
            LeadingShape::Zero => 0.0,
            LeadingShape::Linear => self.leading_coefficient * n,
            LeadingShape::NLogN => self.leading_coefficient * n * n.ln(),
            LeadingShape::Power { exponent } => self.leading_coefficient * n.powf(exponent),
        }
    }

    /// The normalising sequence `n`, `n ln n` or `n^{2L}`.
    pub fn scale(&self, n: f64) -> f64 {
        match self.shape {
            LeadingShape::Zero => 1.0,
            LeadingShape::Linear => n,
            LeadingShape::NLogN => n * n.ln(),
            LeadingShape::Power { exponent } => n.powf(exponent),
        }
    }
}

/// Regime-dependent leading term of `V[W_n]`. The large-index constant is
/// summed to within `tolerance`.
pub fn variance_asymptotic(
    params: &AffineParams,
    model: SamplingModel,
    t0: i64,
    w0: i64,
    tolerance: f64,
) -> Result<VarianceAsymptotic> {
    let class = classify(params, t0);
    if class.regime == Regime::Degenerate {
        return Ok(VarianceAsymptotic { class, shape: LeadingShape::Zero, leading_coefficient: 0.0, constant_c: None });
    }
    let half = frac(1, 2);
    let l = &params.lambda;
    if *l < half {
        let slope = small_index_slope(params)?;
        Ok(VarianceAsymptotic { class, shape: LeadingShape::Linear, leading_coefficient: to_f64(&slope), constant_c: None })
    } else if *l == half {
        Ok(VarianceAsymptotic {
            class,
            shape: LeadingShape::NLogN,
            leading_coefficient: to_f64(&critical_coefficient(params)),
            constant_c: None,
        })
    } else if *l < Rational::one() {
        let c = large_index_constant(params, model, t0, w0, tolerance)?;
        Ok(VarianceAsymptotic {
            class,
            shape: LeadingShape::Power { exponent: 2.0 * params.lambda_f64() },
            leading_coefficient: c.c,
            constant_c: Some(c),
        })
    } else {
        Err(Error::Unsupported(format!("no variance expansion for index {l} >= 1")))
    }
}

/// Running state of the `psi`-weighted series, advanced one `j` at a time.
struct SeriesWalker {
    sm: SecondMomentParams,
    model: SamplingModel,
    delta: f64,
    m: f64,
    shift: f64,
    a_m: f64,
    sigma: f64,
    t0: f64,
    j: u64,
    psi: f64,
    /// `E[W_j]`.
    mean: f64,
}

impl SeriesWalker {
    fn total_before(&self, j: u64) -> f64 {
        self.t0 + self.sigma * (j - 1) as f64
    }

    fn alpha_beta(&self, j: u64) -> (f64, f64) {
        let t = self.total_before(j);
        let (d, m) = (self.delta, self.m);
        let pair = match self.model {
            SamplingModel::WithoutReplacement if self.sm.m > 1 => m * (m - 1.0) / (t * (t - 1.0)),
            SamplingModel::WithoutReplacement => 0.0,
            SamplingModel::WithReplacement => m * (m - 1.0) / (t * t),
        };
        let single = m / t;
        let alpha = 1.0 + d * d * pair + 2.0 * d * m / t;
        let spread = match self.model {
            SamplingModel::WithoutReplacement => single - pair,
            SamplingModel::WithReplacement => single,
        };
        let beta = d * d * spread + 2.0 * m * self.a_m * d / t + 2.0 * self.a_m;
        (alpha, beta)
    }

    /// Advances to `j + 1` and returns `(beta_j E[W_{j-1}] + a_m^2) / psi_j` for the new `j`.
    fn step(&mut self) -> f64 {
        self.j += 1;
        let (alpha, beta) = self.alpha_beta(self.j);
        self.psi *= alpha;
        let value = (beta * self.mean + self.a_m * self.a_m) / self.psi;
        let t = self.total_before(self.j);
        self.mean = self.mean * (1.0 + self.shift / t) + self.a_m;
        value
    }
}

/// `ln psi_j` from the Gamma representation, or `None` if an argument is not positive.
fn ln_psi(sm: &SecondMomentParams, j: f64) -> Option<f64> {
    let (r1, r2) = sm.roots().to_f64();
    let (d1, d2) = sm.denominator_offsets();
    let args = [j + r1, j + r2, j + to_f64(&d1), j + to_f64(&d2)];
    if args.iter().any(|&x| x <= 0.0) {
        return None;
    }
    Some(ln_gamma(args[0]) + ln_gamma(args[1]) - ln_gamma(args[2]) - ln_gamma(args[3]))
}

/// `sum_{j>J} j^{-s}` for `s > 1` by Euler–Maclaurin.
fn power_tail(s: f64, big_j: f64) -> f64 {
    big_j.powf(1.0 - s) / (s - 1.0) - 0.5 * big_j.powf(-s) + s / 12.0 * big_j.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * big_j.powf(-s - 3.0)
}

/// The constant `C` of `V[W_n] ~ C n^{2L}` for `1/2 < L < 1`:
///
/// `C = W0^2/psi_0 + sum_{j>=1} [(beta_j E[W_{j-1}] + a_m^2)/psi_j - B1 j^{-L}(E1 j^{1-L} + E2)]
///      + B1 (E1 zeta(2L - 1) + E2 zeta(L)) - E2^2`.
///
/// `psi_j` is normalised by its Gamma representation at the first `j0 >= 0` where
/// every Gamma argument is positive, and the terms up to `j0` are folded into
/// `E[W_{j0}^2]/psi_{j0}`. The summand is `K2 j^{-2L} + O(j^{-1-L})` with a known
/// `K2`; its `j^{-2L}` tail is added analytically and the remaining tail is
/// bounded by `K^ J^{-L} / L`, where `K^` is twice the largest observed
/// `|residual| j^{1+L}` over the last block. Blocks are doubled until that
/// bound drops below `tolerance` (or two billion terms have been summed).
pub fn large_index_constant(
    params: &AffineParams,
    model: SamplingModel,
    t0: i64,
    w0: i64,
    tolerance: f64,
) -> Result<LargeIndexConstant> {
    let half = frac(1, 2);
    if params.lambda <= half || params.lambda >= Rational::one() {
        return Err(Error::Unsupported(format!("C is defined for 1/2 < index < 1, got {}", params.lambda)));
    }
    if params.a_m == 0 || params.b0 == 0 {
        return Err(Error::Unsupported("C is defined for nontriangular urns".into()));
    }
    if tolerance.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tolerance}")));
    }
    crate::exact::check_start(params, t0, w0)?;

    let k = ExpansionConstants::new(params, t0, w0)?;
    let l = k.lambda;
    let sm = SecondMomentParams::new(params, model, t0);

    // Exact start: E[W_j], E[W_j^2] by the f64 recurrences up to j0.
    let mut walker = SeriesWalker {
        sm: sm.clone(),
        model,
        delta: params.delta() as f64,
        m: params.m as f64,
        shift: params.shift() as f64,
        a_m: params.a_m as f64,
        sigma: params.sigma as f64,
        t0: t0 as f64,
        j: 0,
        psi: 1.0,
        mean: w0 as f64,
    };
    let mut second = (w0 as f64).powi(2);
    let mut j0 = 0u64;
    let ln_psi0 = loop {
        if let Some(v) = ln_psi(&sm, j0 as f64) {
            break v;
        }
        j0 += 1;
        let (alpha, beta) = walker.alpha_beta(j0);
        second = alpha * second + beta * walker.mean + walker.a_m * walker.a_m;
        let t = walker.total_before(j0);
        walker.mean = walker.mean * (1.0 + walker.shift / t) + walker.a_m;
        walker.j = j0;
    };
    walker.psi = ln_psi0.exp();

    let compensator = |j: f64| k.b1 * (k.e1 * j.powf(1.0 - 2.0 * l) + k.e2 * j.powf(-l));
    let mut head = second / walker.psi - (1..=j0).map(|j| compensator(j as f64)).sum::<f64>();
    let mut comp = 0.0f64;
    let mut add = |x: f64, head: &mut f64| {
        // Kahan summation
        let y = x - comp;
        let t = *head + y;
        comp = (t - *head) - y;
        *head = t;
    };

    let k2 = k.k2(k.b1 / 2.0);
    let constant_part = k.b1 * (k.e1 * zeta(2.0 * l - 1.0)? + k.e2 * zeta(l)?) - k.e2 * k.e2;
    let mut block_end = (j0 + 1).max(1024);
    const CAP: u64 = 1 << 31;
    loop {
        let mut worst = 0.0f64;
        let block_start = walker.j + 1;
        while walker.j < block_end {
            let value = walker.step();
            let j = walker.j as f64;
            let s = value - compensator(j);
            add(s, &mut head);
            if walker.j >= block_start + (block_end - block_start) / 2 {
                let residual = s - k2 * j.powf(-2.0 * l);
                worst = worst.max(residual.abs() * j.powf(1.0 + l));
            }
        }
        let big_j = walker.j as f64;
        let bound = 2.0 * worst * big_j.powf(-l) / l;
        if bound < tolerance || walker.j >= CAP {
            let c = head + k2 * power_tail(2.0 * l, big_j) + constant_part;
            return Ok(LargeIndexConstant { c, truncation_bound: bound, terms: walker.j });
        }
        block_end *= 2;
    }
}
