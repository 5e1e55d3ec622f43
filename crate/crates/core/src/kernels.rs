//! Distribution of the number of white balls in one sample of size `m`.
//!
//! Model M draws the sample at once (hypergeometric law), model R draws with
//! replacement (binomial law).

use num_bigint::BigInt;
use num_traits::{CheckedAdd, CheckedMul, One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::SamplingModel;
use crate::rational::{binomial, int, to_f64, Rational};
use crate::rng;

/// Exact law of `k`, the number of white balls in a sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrawDistribution {
    m: usize,
    probabilities: Vec<Rational>,
}

impl DrawDistribution {
    /// Validates that the vector is a probability distribution on `0..=m`.
    pub fn new(probabilities: Vec<Rational>) -> Result<Self> {
        if probabilities.len() < 2 {
            return Err(Error::Domain("a sample distribution needs m >= 1".into()));
        }
        if probabilities.iter().any(Signed::is_negative) {
            return Err(Error::Domain("negative probability".into()));
        }
        let total: Rational = probabilities.iter().sum();
        if !total.is_one() {
            return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(DrawDistribution { m: probabilities.len() - 1, probabilities })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn probabilities(&self) -> &[Rational] {
        &self.probabilities
    }

    pub fn point_mass(&self) -> Option<usize> {
        let nonzero: Vec<usize> = (0..=self.m).filter(|&k| !self.probabilities[k].is_zero()).collect();
        (nonzero.len() == 1).then(|| nonzero[0])
    }
}

fn check_urn(white: i64, total: i64) -> Result<()> {
    if white < 0 || white > total {
        return Err(Error::Domain(format!("white count {white} outside 0..={total}")));
    }
    Ok(())
}

/// `P(k) = C(w, k) C(T - w, m - k) / C(T, m)`.
pub fn hypergeometric_pmf(white: i64, total: i64, m: usize) -> Result<DrawDistribution> {
    if m < 1 || total < m as i64 {
        return Err(Error::Domain(format!("cannot draw {m} balls without replacement from {total}")));
    }
    check_urn(white, total)?;
    let denom = binomial(total, m as i64);
    let probabilities = (0..=m as i64)
        .map(|k| Rational::new(binomial(white, k) * binomial(total - white, m as i64 - k), denom.clone()))
        .collect();
    Ok(DrawDistribution { m, probabilities })
}

/// `P(k) = C(m, k) w^k (T - w)^(m - k) / T^m`.
pub fn binomial_pmf(white: i64, total: i64, m: usize) -> Result<DrawDistribution> {
    if m < 1 {
        return Err(Error::Domain("sample size m must be >= 1".into()));
    }
    if total < 1 {
        return Err(Error::Domain("cannot sample from an empty urn".into()));
    }
    check_urn(white, total)?;
    let denom = BigInt::from(total).pow(m as u32);
    let probabilities = (0..=m)
        .map(|k| {
            let num = binomial(m as i64, k as i64)
                * BigInt::from(white).pow(k as u32)
                * BigInt::from(total - white).pow((m - k) as u32);
            Rational::new(num, denom.clone())
        })
        .collect();
    Ok(DrawDistribution { m, probabilities })
}

pub fn draw_pmf(model: SamplingModel, white: i64, total: i64, m: usize) -> Result<DrawDistribution> {
    match model {
        SamplingModel::WithoutReplacement => hypergeometric_pmf(white, total, m),
        SamplingModel::WithReplacement => binomial_pmf(white, total, m),
    }
}

/// `(sum k p_k, sum k^2 p_k)`.
pub fn moments_of_draw(dist: &DrawDistribution) -> (Rational, Rational) {
    let mut mean = Rational::zero();
    let mut second = Rational::zero();
    for (k, p) in dist.probabilities.iter().enumerate() {
        let k = int(k as i64);
        mean += p * &k;
        second += p * &k * &k;
    }
    (mean, second)
}

/// Closed-form mean and second moment of `k` for an urn with `w` white out of `t`.
pub fn draw_moments_closed_form(model: SamplingModel, w: i64, t: i64, m: usize) -> (Rational, Rational) {
    let (w, t, m) = (int(w), int(t), int(m as i64));
    let mean = &m * &w / &t;
    let second = match model {
        SamplingModel::WithoutReplacement => {
            let one = Rational::one();
            let pairs = if t == one {
                Rational::zero()
            } else {
                &w * (&w - &one) * &m * (&m - &one) / (&t * (&t - &one))
            };
            pairs + &w * &m / &t
        }
        SamplingModel::WithReplacement => {
            let p = &w / &t;
            &m * &p * (Rational::one() - &p) + &mean * &mean
        }
    };
    (mean, second)
}

/// Draws `k` with probability `probabilities[k]`.
///
/// The probabilities are scaled to integers over their common denominator and
/// `k` is chosen by a uniform integer below that denominator, so the law is
/// reproduced exactly whenever the denominator fits in 128 bits.
pub fn sample_draw<R: Rng + ?Sized>(dist: &DrawDistribution, rng: &mut R) -> usize {
    let denom = dist
        .probabilities
        .iter()
        .fold(BigInt::one(), |acc, p| num_integer::Integer::lcm(&acc, p.denom()));
    let weights: Option<Vec<u128>> = dist
        .probabilities
        .iter()
        .map(|p| (p.numer() * (&denom / p.denom())).to_u128())
        .collect();
    match (weights, denom.to_u128()) {
        (Some(w), Some(total)) => pick_u128(&w, total, rng),
        _ => {
            let w: Vec<f64> = dist.probabilities.iter().map(to_f64).collect();
            pick_f64(&w, rng)
        }
    }
}

fn pick_u128<R: Rng + ?Sized>(weights: &[u128], total: u128, rng: &mut R) -> usize {
    let mut u = rng::below_u128(rng, total);
    for (k, &w) in weights.iter().enumerate() {
        if u < w {
            return k;
        }
        u -= w;
    }
    unreachable!("weights sum to the total")
}

fn pick_f64<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng::unit_f64(rng) * total;
    let last = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    for (k, &w) in weights.iter().enumerate().take(last) {
        if u < w {
            return k;
        }
        u -= w;
    }
    last
}

/// Fast per-step sampler for simulations.
///
/// Uses unnormalised integer weights `C(m,k) w^(k) b^(m-k)` (falling
/// factorials, model M) or `C(m,k) w^k b^(m-k)` (model R), whose sum is
/// `T^(m)` or `T^m`. The weights are computed in `u64` when they fit, then in
/// `u128`; beyond that the sampler falls back to floating-point inverse-CDF
/// sampling.
#[derive(Debug, Clone)]
pub struct DrawSampler {
    model: SamplingModel,
    m: usize,
    choose: Vec<f64>,
    choose_int: [u64; MAX_EXACT_M + 1],
    /// Largest urn size with `T^m < 2^64`; below it no weight can overflow `u64`.
    safe_total: u64,
}

const MAX_EXACT_M: usize = 8;

impl DrawSampler {
    pub fn new(model: SamplingModel, m: usize) -> Self {
        let choose = (0..=m).map(|k| to_f64(&Rational::from(binomial(m as i64, k as i64)))).collect();
        let mut choose_int = [0u64; MAX_EXACT_M + 1];
        for (k, slot) in choose_int.iter_mut().enumerate().take(m.min(MAX_EXACT_M) + 1) {
            *slot = binomial(m as i64, k as i64).to_u64().expect("small binomial");
        }
        let safe_total = if m > MAX_EXACT_M {
            0
        } else {
            let mut t = (2f64.powf(64.0 / m as f64)) as u64;
            while t.checked_pow(m as u32).is_none() {
                t -= 1;
            }
            while t.checked_add(1).and_then(|x| x.checked_pow(m as u32)).is_some() {
                t += 1;
            }
            t
        };
        DrawSampler { model, m, choose, choose_int, safe_total }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of white balls in a sample from an urn with `white` white out of `total`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, white: i64, total: i64, rng: &mut R) -> usize {
        let black = total - white;
        if white == 0 {
            return 0;
        }
        if black == 0 {
            return self.m;
        }
        if self.m == 1 {
            return usize::from(rng::below_u64(rng, total as u64) < white as u64);
        }
        if (total as u64) <= self.safe_total {
            let mut small = [0u64; MAX_EXACT_M + 1];
            let out = &mut small[..=self.m];
            let t = self.weights_unchecked(white as u64, black as u64, out);
            let u = rng::below_u64(rng, t);
            return scan(out, u);
        }
        if self.m <= MAX_EXACT_M {
            let mut small = [0u64; MAX_EXACT_M + 1];
            let out = &mut small[..=self.m];
            if let Some(t) = self.weights::<u64>(white as u64, black as u64, out) {
                let u = rng::below_u64(rng, t);
                return scan(out, u);
            }
            let mut big = [0u128; MAX_EXACT_M + 1];
            let out = &mut big[..=self.m];
            if let Some(t) = self.weights::<u128>(white as u64, black as u64, out) {
                let u = rng::below_u128(rng, t);
                return scan(out, u);
            }
        }
        let w = self.weights_f64(white as f64, black as f64);
        pick_f64(&w, rng)
    }

    #[inline]
    fn factor(&self, x: u64, j: usize) -> u64 {
        match self.model {
            SamplingModel::WithoutReplacement => x.saturating_sub(j as u64),
            SamplingModel::WithReplacement => x,
        }
    }

    /// As [`Self::weights`] for urns no larger than `safe_total`, where every
    /// partial product is bounded by `T^m`.
    #[inline]
    fn weights_unchecked(&self, w: u64, b: u64, out: &mut [u64]) -> u64 {
        let m = self.m;
        let step = u64::from(self.model == SamplingModel::WithoutReplacement);
        let mut acc = 1u64;
        let mut x = w;
        out[0] = 1;
        for slot in out[1..].iter_mut() {
            acc *= x;
            *slot = acc;
            x = x.saturating_sub(step);
        }
        let mut black = 1u64;
        let mut y = b;
        let mut total = out[m] * self.choose_int[m];
        out[m] = total;
        for k in (0..m).rev() {
            black *= y;
            y = y.saturating_sub(step);
            out[k] = out[k] * black * self.choose_int[k];
            total += out[k];
        }
        total
    }

    /// Fills `out[k]` and returns the total, or `None` on overflow.
    #[inline]
    fn weights<U>(&self, w: u64, b: u64, out: &mut [U]) -> Option<U>
    where
        U: Copy + From<u64> + CheckedMul + CheckedAdd + Zero + One,
    {
        let m = self.m;
        // out[k] = w^(k) (or w^k), then the black part and C(m, k) are multiplied in
        let mut acc = U::one();
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = acc;
            if k < m {
                acc = acc.checked_mul(&U::from(self.factor(w, k)))?;
            }
        }
        let mut black = U::one();
        let mut total = U::zero();
        for j in 0..=m {
            let k = m - j;
            out[k] = out[k].checked_mul(&black)?.checked_mul(&U::from(self.choose_int[k]))?;
            total = total.checked_add(&out[k])?;
            if j < m {
                black = black.checked_mul(&U::from(self.factor(b, j)))?;
            }
        }
        Some(total)
    }

    fn weights_f64(&self, w: f64, b: f64) -> Vec<f64> {
        let m = self.m;
        let shift = |j: usize| match self.model {
            SamplingModel::WithoutReplacement => j as f64,
            SamplingModel::WithReplacement => 0.0,
        };
        (0..=m)
            .map(|k| {
                let white: f64 = (0..k).map(|j| (w - shift(j)).max(0.0)).product();
                let black: f64 = (0..m - k).map(|j| (b - shift(j)).max(0.0)).product();
                self.choose[k] * white * black
            })
            .collect()
    }
}

/// Index `k` with `sum_{j<k} w_j <= u < sum_{j<=k} w_j`, counted without branches.
#[inline]
fn scan<U: Copy + PartialOrd + std::ops::AddAssign>(weights: &[U], u: U) -> usize {
    let mut cumulative = weights[0];
    let mut k = 0usize;
    for &w in &weights[1..] {
        k += usize::from(u >= cumulative);
        cumulative += w;
    }
    k
}
