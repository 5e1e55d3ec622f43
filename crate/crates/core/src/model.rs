//! Urn schemas: replacement matrices, tenability, affinity and index classification.
//!
//! A sample of `m` balls containing `k` white and `m - k` black balls adds
//! `a[m - k]` white and `b[m - k]` black balls. Rows are balanced:
//! `a[k] + b[k] = sigma` for every `k`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{binomial, frac, int, Rational};

/// How the `m` balls of one drawing are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SamplingModel {
    /// Model M: the sample is drawn at once, without replacement.
    WithoutReplacement,
    /// Model R: balls are drawn one at a time and returned before the next pick.
    WithReplacement,
}

impl SamplingModel {
    pub const ALL: [SamplingModel; 2] =
        [SamplingModel::WithoutReplacement, SamplingModel::WithReplacement];

    pub fn symbol(self) -> &'static str {
        match self {
            SamplingModel::WithoutReplacement => "M",
            SamplingModel::WithReplacement => "R",
        }
    }
}

impl fmt::Display for SamplingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for SamplingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "M" | "m" | "without" | "without-replacement" => Ok(SamplingModel::WithoutReplacement),
            "R" | "r" | "with" | "with-replacement" => Ok(SamplingModel::WithReplacement),
            other => Err(Error::Domain(format!("unknown sampling model {other:?} (expected M or R)"))),
        }
    }
}

/// Balanced `(m+1) x 2` ball replacement matrix. Only the white column is
/// stored; `b[k] = sigma - a[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReplacementMatrix {
    a: Vec<i64>,
    sigma: i64,
}

impl ReplacementMatrix {
    /// Builds a matrix from the white column `a[0..=m]` and the balance `sigma`.
    pub fn new(a: Vec<i64>, sigma: i64) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::InvalidMatrix(format!(
                "need m + 1 >= 2 rows, got {}",
                a.len()
            )));
        }
        if sigma < 1 {
            return Err(Error::InvalidMatrix(format!("balance sigma must be >= 1, got {sigma}")));
        }
        Ok(ReplacementMatrix { a, sigma })
    }

    /// Builds a matrix from both columns, checking the balance condition.
    pub fn from_rows(a: Vec<i64>, b: Vec<i64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidMatrix(format!(
                "white column has {} rows, black column has {}",
                a.len(),
                b.len()
            )));
        }
        let sigma = match (a.first(), b.first()) {
            (Some(x), Some(y)) => x + y,
            _ => return Err(Error::InvalidMatrix("empty matrix".into())),
        };
        if let Some(k) = (0..a.len()).find(|&k| a[k] + b[k] != sigma) {
            return Err(Error::InvalidMatrix(format!(
                "row {k} is unbalanced: a_{k} + b_{k} = {} but row 0 sums to {sigma}",
                a[k] + b[k]
            )));
        }
        Self::new(a, sigma)
    }

    /// Generates the affine matrix `a_k = (m-k) a_{m-1} - (m-k-1) a_m`.
    pub fn from_affine(m: usize, a_m_minus_1: i64, a_m: i64, sigma: i64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidMatrix("sample size m must be >= 1".into()));
        }
        let a = (0..=m)
            .map(|k| {
                let r = (m - k) as i64;
                r * a_m_minus_1 - (r - 1) * a_m
            })
            .collect();
        Self::new(a, sigma)
    }

    pub fn m(&self) -> usize {
        self.a.len() - 1
    }

    pub fn sigma(&self) -> i64 {
        self.sigma
    }

    pub fn a(&self) -> &[i64] {
        &self.a
    }

    pub fn a_k(&self, k: usize) -> i64 {
        self.a[k]
    }

    pub fn b_k(&self, k: usize) -> i64 {
        self.sigma - self.a[k]
    }

    pub fn b(&self) -> Vec<i64> {
        self.a.iter().map(|x| self.sigma - x).collect()
    }

    /// White balls added when the sample holds `white_drawn` white balls.
    #[inline]
    pub fn white_added(&self, white_drawn: usize) -> i64 {
        self.a[self.m() - white_drawn]
    }

    /// The same urn with colours exchanged: `a'_k = b_{m-k}`.
    pub fn swap_colors(&self) -> Self {
        let m = self.m();
        ReplacementMatrix {
            a: (0..=m).map(|k| self.b_k(m - k)).collect(),
            sigma: self.sigma,
        }
    }
}

impl fmt::Display for ReplacementMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={} sigma={} a={:?} b={:?}", self.m(), self.sigma, self.a, self.b())
    }
}

/// Urn composition after `step` drawings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UrnState {
    pub white: i64,
    pub total: i64,
    pub step: u64,
}

impl UrnState {
    pub fn initial(white: i64, black: i64) -> Self {
        UrnState { white, total: white + black, step: 0 }
    }

    pub fn black(&self) -> i64 {
        self.total - self.white
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colour {
    White,
    Black,
}

/// One row of the matrix that breaks a tenability bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub colour: Colour,
    pub row: usize,
    pub value: i64,
    pub bound: i64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.colour {
            Colour::White => 'a',
            Colour::Black => 'b',
        };
        write!(f, "row {}: {c}_{} = {} < {}", self.row, self.row, self.value, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TenabilityReport {
    pub model: SamplingModel,
    pub violations: Vec<Violation>,
}

impl TenabilityReport {
    pub fn is_tenable(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn diagnostics(&self) -> Vec<String> {
        self.violations.iter().map(ToString::to_string).collect()
    }
}

/// Per-row tenability bounds.
///
/// Model M: `a_k >= -(m-k)` and `b_k >= -k`. Model R: `a_k >= -1` for
/// `k < m`, `a_m >= 0`, `b_k >= -1` for `k >= 1`, `b_0 >= 0`. The black
/// bounds mirror the white ones so that removals of either colour are always
/// feasible. The initial-total requirement `W0 + B0 >= m` is checked by the
/// callers that know `T0`.
pub fn validate_tenability(matrix: &ReplacementMatrix, model: SamplingModel) -> TenabilityReport {
    let m = matrix.m();
    let mut violations = Vec::new();
    for k in 0..=m {
        let (white_bound, black_bound) = match model {
            SamplingModel::WithoutReplacement => (-((m - k) as i64), -(k as i64)),
            SamplingModel::WithReplacement => (
                if k == m { 0 } else { -1 },
                if k == 0 { 0 } else { -1 },
            ),
        };
        if matrix.a_k(k) < white_bound {
            violations.push(Violation { colour: Colour::White, row: k, value: matrix.a_k(k), bound: white_bound });
        }
        if matrix.b_k(k) < black_bound {
            violations.push(Violation { colour: Colour::Black, row: k, value: matrix.b_k(k), bound: black_bound });
        }
    }
    TenabilityReport { model, violations }
}

/// Reduced parametrisation of an affine urn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineParams {
    pub a_m_minus_1: i64,
    pub a_m: i64,
    pub sigma: i64,
    pub m: usize,
    /// Urn index `m (a_{m-1} - a_m) / sigma`.
    pub lambda: Rational,
    /// `b_0 = sigma (1 - lambda) - a_m`.
    pub b0: i64,
}

impl AffineParams {
    pub fn new(m: usize, a_m_minus_1: i64, a_m: i64, sigma: i64) -> Result<Self> {
        if m < 1 || sigma < 1 {
            return Err(Error::InvalidMatrix(format!("need m >= 1 and sigma >= 1 (m={m}, sigma={sigma})")));
        }
        let delta = a_m_minus_1 - a_m;
        let lambda = frac(m as i64 * delta, sigma);
        let b0 = sigma - m as i64 * delta - a_m;
        Ok(AffineParams { a_m_minus_1, a_m, sigma, m, lambda, b0 })
    }

    /// Second eigenvalue of the reduced matrix, `a_{m-1} - a_m`.
    pub fn delta(&self) -> i64 {
        self.a_m_minus_1 - self.a_m
    }

    /// `m (a_{m-1} - a_m)`.
    pub fn shift(&self) -> i64 {
        self.m as i64 * self.delta()
    }

    pub fn lambda_f64(&self) -> f64 {
        self.shift() as f64 / self.sigma as f64
    }

    pub fn matrix(&self) -> ReplacementMatrix {
        ReplacementMatrix::from_affine(self.m, self.a_m_minus_1, self.a_m, self.sigma)
            .expect("affine parameters were validated on construction")
    }

    /// The affine parameters of the colour-swapped urn.
    pub fn swap_colors(&self) -> AffineParams {
        let swapped = self.matrix().swap_colors();
        let m = self.m;
        AffineParams::new(m, swapped.a_k(m - 1), swapped.a_k(m), self.sigma)
            .expect("swapping colours keeps m and sigma")
    }

    /// `a_m / (a_m + b_0)`, the almost-sure limit of `W_n / T_n` for nontriangular urns.
    pub fn ratio_limit(&self) -> Rational {
        frac(self.a_m, self.a_m + self.b0)
    }
}

/// Outcome of [`check_affinity`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Affinity {
    Affine(AffineParams),
    /// First row `k` with `a_k != (m-k) a_{m-1} - (m-k-1) a_m`.
    NotAffine { k: usize, expected: i64, actual: i64 },
}

impl Affinity {
    pub fn params(&self) -> Option<&AffineParams> {
        match self {
            Affinity::Affine(p) => Some(p),
            Affinity::NotAffine { .. } => None,
        }
    }
}

pub fn check_affinity(matrix: &ReplacementMatrix) -> Affinity {
    let m = matrix.m();
    let (am1, am) = (matrix.a_k(m - 1), matrix.a_k(m));
    for k in 0..=m {
        let r = (m - k) as i64;
        let expected = r * am1 - (r - 1) * am;
        if matrix.a_k(k) != expected {
            return Affinity::NotAffine { k, expected, actual: matrix.a_k(k) };
        }
    }
    Affinity::Affine(
        AffineParams::new(m, am1, am, matrix.sigma()).expect("matrix invariants imply valid params"),
    )
}

/// Urn index `Lambda = m (a_{m-1} - a_m) / sigma`.
pub fn index(params: &AffineParams) -> Rational {
    frac(params.shift(), params.sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `Lambda = 0`: `W_n = W_0 + n a_m` deterministically.
    Degenerate,
    /// `a_m = 0` or `b_0 = 0`.
    Triangular,
    SmallIndex,
    CriticalIndex,
    LargeIndex,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Degenerate => "degenerate",
            Regime::Triangular => "triangular",
            Regime::SmallIndex => "small-index",
            Regime::CriticalIndex => "critical-index",
            Regime::LargeIndex => "large-index",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexClass {
    pub regime: Regime,
    /// `T0 + m(a_{m-1} - a_m) <= 0`: the compensating product `g_n` is undefined
    /// until the urn is restarted at a later step.
    pub restart_required: bool,
}

/// Precedence: degenerate, then triangular, then the index comparison with 1/2.
pub fn classify(params: &AffineParams, t0: i64) -> IndexClass {
    let lambda = index(params);
    let half = frac(1, 2);
    let regime = if lambda.is_zero() {
        Regime::Degenerate
    } else if params.a_m == 0 || params.b0 == 0 {
        Regime::Triangular
    } else if lambda < half {
        Regime::SmallIndex
    } else if lambda == half {
        Regime::CriticalIndex
    } else {
        Regime::LargeIndex
    };
    IndexClass { regime, restart_required: t0 + params.shift() <= 0 }
}

/// Named urn families that the affine class contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `a_k = c` for every row.
    Degenerate { c: i64 },
    /// `a_k = k c`, `sigma = m c`.
    GeneralizedFriedman { c: i64 },
    /// `a_k = (m - k) c`, `sigma = m c`.
    GeneralizedPolya { c: i64 },
    /// `a_k = 1 - (m - k)`, `sigma = 1`.
    LogicCircuit,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Degenerate { c } => write!(f, "degenerate (W_n = W_0 + {c} n)"),
            Family::GeneralizedFriedman { c } => write!(f, "generalized Friedman urn (c = {c})"),
            Family::GeneralizedPolya { c } => write!(f, "generalized Polya urn (c = {c})"),
            Family::LogicCircuit => f.write_str("logic-circuit urn"),
        }
    }
}

pub fn identify_family(matrix: &ReplacementMatrix) -> Option<Family> {
    let m = matrix.m() as i64;
    let a = matrix.a();
    let sigma = matrix.sigma();
    if a.iter().all(|&x| x == a[0]) {
        return Some(Family::Degenerate { c: a[0] });
    }
    let c = a[1] - a[0];
    if a[0] == 0 && sigma == m * c && a.iter().enumerate().all(|(k, &x)| x == k as i64 * c) {
        return Some(Family::GeneralizedFriedman { c });
    }
    let c = a[0] / m;
    if sigma == m * c && a.iter().enumerate().all(|(k, &x)| x == (m - k as i64) * c) {
        return Some(Family::GeneralizedPolya { c });
    }
    if sigma == 1 && a.iter().enumerate().all(|(k, &x)| x == 1 - (m - k as i64)) {
        return Some(Family::LogicCircuit);
    }
    None
}

/// Coefficients `f_0..f_m` of `E[W_n | F_{n-1}] = sum_i f_i W_{n-1}^i`, given
/// the total `t_prev = T_{n-1}` before the drawing.
pub fn conditional_coefficients(
    matrix: &ReplacementMatrix,
    model: SamplingModel,
    t_prev: i64,
) -> Result<Vec<Rational>> {
    let m = matrix.m();
    if t_prev < m as i64 {
        return Err(Error::Domain(format!(
            "cannot draw a sample of size {m} from an urn holding {t_prev} balls"
        )));
    }
    let mut f = match model {
        SamplingModel::WithReplacement => coefficients_with_replacement(matrix, t_prev),
        SamplingModel::WithoutReplacement => coefficients_without_replacement(matrix, t_prev),
    };
    f[1] += Rational::one();
    Ok(f)
}

fn coefficients_with_replacement(matrix: &ReplacementMatrix, t: i64) -> Vec<Rational> {
    let m = matrix.m() as i64;
    (0..=m)
        .map(|i| {
            let sum: BigInt = (0..=i)
                .map(|k| {
                    let sign = if k % 2 == 0 { 1 } else { -1 };
                    BigInt::from(matrix.a_k((m - k) as usize) * sign)
                        * binomial(m, k)
                        * binomial(m - k, m - i)
                })
                .sum();
            let sign = if i % 2 == 0 { int(1) } else { int(-1) };
            sign * Rational::new(sum, BigInt::from(t).pow(i as u32))
        })
        .collect()
}

fn coefficients_without_replacement(matrix: &ReplacementMatrix, t: i64) -> Vec<Rational> {
    let m = matrix.m();
    let t_falling_m = crate::rational::falling(t, m);
    let mut acc = vec![BigInt::zero(); m + 1];
    for j in 0..=m {
        let p = polynomial_p(matrix, j);
        let weight = crate::rational::falling(t, j);
        for (i, c) in p.iter().enumerate() {
            acc[i] += &weight * c;
        }
    }
    acc.into_iter().map(|c| Rational::new(c, t_falling_m.clone())).collect()
}

/// `p_{m,j}(x) = sum_{k=0}^{m-j} a_{m-k} C(m,k) x^(k) C(m-k,j) (-x)^(m-k-j)` in the
/// monomial basis, lowest degree first, padded to length `m + 1`.
fn polynomial_p(matrix: &ReplacementMatrix, j: usize) -> Vec<BigInt> {
    let m = matrix.m();
    let mut out = vec![BigInt::zero(); m + 1];
    for k in 0..=(m - j) {
        let scale = BigInt::from(matrix.a_k(m - k)) * binomial(m as i64, k as i64)
            * binomial((m - k) as i64, j as i64);
        if scale.is_zero() {
            continue;
        }
        let term = poly_mul(&falling_poly(k, false), &falling_poly(m - k - j, true));
        for (i, c) in term.into_iter().enumerate() {
            out[i] += &scale * c;
        }
    }
    out
}

/// `x^(k)` or, with `negated`, `(-x)^(k)` as a polynomial in `x`.
fn falling_poly(k: usize, negated: bool) -> Vec<BigInt> {
    let lead = if negated { -BigInt::one() } else { BigInt::one() };
    (0..k).fold(vec![BigInt::one()], |acc, i| {
        poly_mul(&acc, &[-BigInt::from(i as i64), lead.clone()])
    })
}

fn poly_mul(p: &[BigInt], q: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); p.len() + q.len() - 1];
    for (i, x) in p.iter().enumerate() {
        for (j, y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// True when every coefficient of degree `>= 2` vanishes.
pub fn is_linear(coefficients: &[Rational]) -> bool {
    coefficients.iter().skip(2).all(Zero::is_zero)
}

/// Sign helper used by callers comparing exact quantities.
pub fn sign(q: &Rational) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(a: &[i64], sigma: i64) -> ReplacementMatrix {
        ReplacementMatrix::new(a.to_vec(), sigma).unwrap()
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(ReplacementMatrix::new(vec![1], 1).is_err());
        assert!(ReplacementMatrix::new(vec![1, 2], 0).is_err());
        assert!(ReplacementMatrix::from_rows(vec![1, 2], vec![1, 1]).is_err());
        let ok = ReplacementMatrix::from_rows(vec![1, 2], vec![1, 0]).unwrap();
        assert_eq!(ok.sigma(), 2);
    }

    #[test]
    fn tenability_examples() {
        // logic-circuit urn a_k = -(m-k)+1
        let logic = mat(&[-1, 0, 1], 1);
        assert!(validate_tenability(&logic, SamplingModel::WithoutReplacement).is_tenable());
        assert!(validate_tenability(&mat(&[0, 1, 2], 2), SamplingModel::WithReplacement).is_tenable());

        let bad = mat(&[-3, 0, 1], 1);
        let report = validate_tenability(&bad, SamplingModel::WithoutReplacement);
        assert!(!report.is_tenable());
        assert_eq!(report.violations[0], Violation { colour: Colour::White, row: 0, value: -3, bound: -2 });
        assert_eq!(report.diagnostics()[0], "row 0: a_0 = -3 < -2");
    }

    #[test]
    fn tenability_checks_black_column() {
        // b = (1, 0, -3): b_2 breaks the bound -2
        let m = mat(&[0, 1, 4], 1);
        let report = validate_tenability(&m, SamplingModel::WithoutReplacement);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].colour, Colour::Black);
        assert_eq!(report.violations[0].row, 2);
        // model R: b_0 must be >= 0
        let r = validate_tenability(&mat(&[3, 2, 1], 2), SamplingModel::WithReplacement);
        assert_eq!(r.violations, vec![Violation { colour: Colour::Black, row: 0, value: -1, bound: 0 }]);
    }

    #[test]
    fn affinity_examples() {
        let p = check_affinity(&mat(&[0, 1, 2], 2));
        let p = p.params().unwrap();
        assert_eq!((p.a_m_minus_1, p.a_m), (1, 2));

        let deg = check_affinity(&mat(&[5, 5, 5, 5], 7));
        assert_eq!(index(deg.params().unwrap()), int(0));
        assert_eq!(classify(deg.params().unwrap(), 3).regime, Regime::Degenerate);

        assert_eq!(
            check_affinity(&mat(&[1, 0, 2], 2)),
            Affinity::NotAffine { k: 0, expected: -2, actual: 1 }
        );
        // m = 1 is always affine
        assert!(check_affinity(&mat(&[3, -1], 4)).params().is_some());
    }

    #[test]
    fn index_examples() {
        let friedman = check_affinity(&mat(&[0, 1, 2], 2));
        assert_eq!(index(friedman.params().unwrap()), int(-1));
        let polya = check_affinity(&mat(&[2, 1, 0], 2));
        assert_eq!(index(polya.params().unwrap()), int(1));
    }

    #[test]
    fn classify_examples() {
        let crit = AffineParams::new(2, 2, 1, 4).unwrap();
        assert_eq!(crit.matrix().a(), &[3, 2, 1]);
        assert_eq!(crit.b0, 1);
        assert_eq!(classify(&crit, 4).regime, Regime::CriticalIndex);

        let large = check_affinity(&mat(&[7, 5, 3, 1], 8));
        let large = large.params().unwrap();
        assert_eq!(large.lambda, frac(3, 4));
        assert_eq!(classify(large, 8).regime, Regime::LargeIndex);

        let polya = AffineParams::new(2, 1, 0, 2).unwrap();
        assert_eq!(classify(&polya, 2).regime, Regime::Triangular);

        let friedman = AffineParams::new(2, 1, 2, 2).unwrap();
        let c = classify(&friedman, 2);
        assert_eq!(c.regime, Regime::SmallIndex);
        assert!(c.restart_required);
        assert!(!classify(&friedman, 3).restart_required);
    }

    #[test]
    fn families() {
        assert_eq!(identify_family(&mat(&[0, 1, 2], 2)), Some(Family::GeneralizedFriedman { c: 1 }));
        assert_eq!(identify_family(&mat(&[4, 2, 0], 4)), Some(Family::GeneralizedPolya { c: 2 }));
        assert_eq!(identify_family(&mat(&[-1, 0, 1], 1)), Some(Family::LogicCircuit));
        assert_eq!(identify_family(&mat(&[2, 2, 2, 2], 3)), Some(Family::Degenerate { c: 2 }));
        assert_eq!(identify_family(&mat(&[3, 2, 1], 4)), None);
    }

    #[test]
    fn affine_coefficients_match_closed_form() {
        for model in SamplingModel::ALL {
            for (a, sigma) in [(vec![3, 2, 1], 4), (vec![0, 1, 2], 2), (vec![7, 5, 3, 1], 8), (vec![-1, 0, 1], 1)] {
                let matrix = mat(&a, sigma);
                let p = check_affinity(&matrix);
                let p = p.params().unwrap();
                for t in [3i64, 10, 17] {
                    let f = conditional_coefficients(&matrix, model, t).unwrap();
                    assert!(is_linear(&f), "{matrix} {model} T={t}: {f:?}");
                    assert_eq!(f[0], int(p.a_m));
                    assert_eq!(f[1], frac(t + p.shift(), t));
                }
            }
        }
    }

    #[test]
    fn nonaffine_has_quadratic_term() {
        let matrix = mat(&[1, 0, 2], 2);
        let f = conditional_coefficients(&matrix, SamplingModel::WithReplacement, 10).unwrap();
        assert!(!f[2].is_zero());
        assert!(conditional_coefficients(&matrix, SamplingModel::WithoutReplacement, 1).is_err());
    }

    /// The coefficients reproduce the one-step conditional mean computed by
    /// summing over sample compositions.
    #[test]
    fn coefficients_reproduce_direct_conditional_mean() {
        for model in SamplingModel::ALL {
            for (a, sigma) in [(vec![1, 0, 2], 2), (vec![2, -1, 0, 3], 4), (vec![1, 3], 5)] {
                let matrix = mat(&a, sigma);
                let t = 9;
                let f = conditional_coefficients(&matrix, model, t).unwrap();
                for w in 0..=t {
                    let pmf = crate::kernels::draw_pmf(model, w, t, matrix.m()).unwrap();
                    let direct: Rational = pmf
                        .probabilities()
                        .iter()
                        .enumerate()
                        .map(|(k, p)| p * int(w + matrix.white_added(k)))
                        .sum();
                    let poly: Rational = f.iter().enumerate().map(|(i, c)| c * int(w.pow(i as u32))).sum();
                    assert_eq!(direct, poly, "{matrix} {model} w={w}");
                }
            }
        }
    }

    fn arb_matrix() -> impl Strategy<Value = ReplacementMatrix> {
        (1usize..=4, 1i64..=6).prop_flat_map(|(m, sigma)| {
            prop::collection::vec(-3i64..=4, m + 1).prop_map(move |a| ReplacementMatrix::new(a, sigma).unwrap())
        })
    }

    proptest! {
        #[test]
        fn affinity_iff_linear_conditional_mean(matrix in arb_matrix(), model_r in any::<bool>()) {
            let model = if model_r { SamplingModel::WithReplacement } else { SamplingModel::WithoutReplacement };
            prop_assume!(validate_tenability(&matrix, model).is_tenable());
            let affine = check_affinity(&matrix).params().is_some();
            let m = matrix.m() as i64;
            let linear = [m, m + 7, m + 23]
                .iter()
                .all(|&t| is_linear(&conditional_coefficients(&matrix, model, t).unwrap()));
            prop_assert_eq!(affine, linear);
        }

        #[test]
        fn affine_round_trip(m in 1usize..=5, am1 in -4i64..=4, am in -4i64..=4, sigma in 1i64..=8) {
            let params = AffineParams::new(m, am1, am, sigma).unwrap();
            let back = check_affinity(&params.matrix());
            prop_assert_eq!(back.params(), Some(&params));
        }

        #[test]
        fn colour_swap_keeps_triangular(m in 1usize..=4, c in 1i64..=4, t0 in 4i64..=10) {
            // a_m = 0 urns map to b_0 = 0 urns and both classify as triangular
            let params = AffineParams::new(m, c, 0, m as i64 * c + 1).unwrap();
            let swapped = params.swap_colors();
            prop_assert_eq!(swapped.b0, 0);
            prop_assert_eq!(swapped.swap_colors(), params.clone());
            prop_assert_eq!(classify(&params, t0).regime, Regime::Triangular);
            prop_assert_eq!(classify(&swapped, t0).regime, Regime::Triangular);
        }

        #[test]
        fn degenerate_index_is_zero(m in 1usize..=6, c in -5i64..=5, sigma in 1i64..=9) {
            let p = AffineParams::new(m, c, c, sigma).unwrap();
            prop_assert_eq!(index(&p), int(0));
        }
    }
}
