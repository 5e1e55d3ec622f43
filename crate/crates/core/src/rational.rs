//! Exact rational helpers on top of `num-rational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Nearest `f64` to `q`.
pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `"p/q"` with `q >= 1`; integers are written as `"p/1"`.
pub fn to_pq(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// 17 significant digits, scientific notation.
pub fn to_decimal(q: &Rational) -> String {
    format_f64(to_f64(q))
}

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Binomial coefficient `C(n, k)`; zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Falling factorial `x(x-1)...(x-k+1)` for integer `x`.
pub fn falling(x: i64, k: usize) -> BigInt {
    (0..k as i64).fold(BigInt::one(), |acc, i| acc * BigInt::from(x - i))
}

/// Rational within `10^-digits` (relative to 1) of `sqrt(q)`, `q >= 0`.
///
/// Computed as `isqrt(p * q * S^2) / (q * S)` with `S = 10^digits`, so it is an
/// exact rational approximation that never rounds through `f64`.
pub fn sqrt_approx(q: &Rational, digits: u32) -> Rational {
    assert!(!q.is_negative(), "sqrt of negative rational");
    let scale = BigInt::from(10u32).pow(digits);
    let radicand = q.numer() * q.denom() * &scale * &scale;
    Rational::new(radicand.sqrt(), q.denom() * scale)
}

/// Exact square root when `q` is the square of a rational.
pub fn exact_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let rn = q.numer().sqrt();
    let rd = q.denom().sqrt();
    (&rn * &rn == *q.numer() && &rd * &rd == *q.denom()).then(|| Rational::new(rn, rd))
}

/// `|a - b| / max(|b|, tiny)` for high-precision comparisons.
pub fn relative_gap(a: &Rational, b: &Rational) -> Rational {
    let diff = (a - b).abs();
    if b.is_zero() {
        diff
    } else {
        diff / b.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), BigInt::from(6));
        assert_eq!(binomial(2, 3), BigInt::zero());
        assert_eq!(binomial(5, -1), BigInt::zero());
        assert_eq!(binomial(30, 15), BigInt::from(155_117_520));
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling(5, 0), BigInt::one());
        assert_eq!(falling(5, 3), BigInt::from(60));
        assert_eq!(falling(2, 3), BigInt::zero());
        assert_eq!(falling(-2, 2), BigInt::from(6));
    }

    #[test]
    fn sqrt_of_two_to_sixty_digits() {
        let r = sqrt_approx(&int(2), 60);
        let err = (&r * &r - int(2)).abs();
        assert!(err < Rational::new(BigInt::one(), BigInt::from(10u32).pow(59)));
        assert_eq!(exact_sqrt(&frac(9, 4)), Some(frac(3, 2)));
        assert_eq!(exact_sqrt(&int(3)), None);
    }

    #[test]
    fn formatting() {
        assert_eq!(to_pq(&int(5)), "5/1");
        assert_eq!(to_pq(&frac(-2, 6)), "-1/3");
        assert_eq!(to_decimal(&frac(1, 3)), "3.3333333333333331e-1");
    }
}
