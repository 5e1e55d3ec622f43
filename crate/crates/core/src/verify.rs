//! Statistical checks of simulated urns against the limit theorems.

use std::fmt::{self, Write as _};

use num_traits::One;

use crate::asymptotics::{large_index_constant, ExpansionConstants};
use crate::error::{Error, Result};
use crate::model::{check_affinity, classify, AffineParams, IndexClass, Regime};
use crate::numeric::NumericSeries;
use crate::rational::{frac, int, Rational};
use crate::simulate::{mean_var, run, Checkpoints, RecordOptions, SimulationConfig, SimulationOutput};

/// `Phi(x)` through `erfc`, accurate to about `1e-16`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov–Smirnov distance to the standard normal.
///
/// # Panics
///
/// On an empty sample or NaN entries.
pub fn ks_statistic(sample: &[f64]) -> f64 {
    assert!(!sample.is_empty(), "KS statistic of an empty sample");
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// KS distance for lattice data: at each support point `x` the empirical CDF
/// is compared with the continuity-corrected `Phi(x + span/2)`, where `span` is
/// the lattice step in the units of `sample`.
pub fn ks_statistic_lattice(sample: &[f64], span: f64) -> f64 {
    assert!(!sample.is_empty(), "KS statistic of an empty sample");
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        d = d.max((j as f64 / n - normal_cdf(x + span / 2.0)).abs());
        i = j;
    }
    d
}

/// Step of the lattice `W0 + a_m n + g Z` carrying `W_n`: `g = gcd(a_k - a_m)`.
pub fn lattice_step(params: &AffineParams) -> i64 {
    // a_k - a_m = (m - k)(a_{m-1} - a_m)
    params.delta().abs()
}

/// Asymptotic KS critical values `c / sqrt(R)`.
pub const KS_ONE_PERCENT: f64 = 1.628;
pub const KS_FIVE_PERCENT: f64 = 1.358;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Centering {
    /// Exact mean below `n = 10^4`, the asymptotic mean above.
    #[default]
    Auto,
    Exact,
    Asymptotic,
}

impl Centering {
    fn use_exact(self, n: u64) -> bool {
        match self {
            Centering::Auto => n < 10_000,
            Centering::Exact => true,
            Centering::Asymptotic => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Unsupported,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Unsupported => "unsupported",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub name: String,
    pub status: Status,
    pub statistic: Option<f64>,
    pub threshold: Option<f64>,
    pub n: u64,
    pub replicates: u64,
    pub seed: u64,
    pub note: String,
}

impl TestResult {
    fn unsupported(name: &str, config: &SimulationConfig, reason: String) -> Self {
        TestResult {
            name: name.into(),
            status: Status::Unsupported,
            statistic: None,
            threshold: None,
            n: config.n_steps,
            replicates: config.replicates,
            seed: config.master_seed,
            note: reason,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

fn affine(config: &SimulationConfig) -> Result<AffineParams> {
    check_affinity(&config.matrix)
        .params()
        .cloned()
        .ok_or_else(|| Error::Unsupported("the urn is not affine".into()))
}

fn regime_of(config: &SimulationConfig) -> Result<(AffineParams, IndexClass)> {
    let params = affine(config)?;
    let class = classify(&params, config.t0());
    Ok((params, class))
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// Square root of the limiting variance times `n` (small index) or `n ln n` (critical index).
fn standard_deviation(params: &AffineParams, regime: Regime, n: u64) -> f64 {
    let nf = n as f64;
    let lambda = params.lambda_f64();
    let (am, b0, m) = (params.a_m as f64, params.b0 as f64, params.m as f64);
    let variance = match regime {
        Regime::CriticalIndex => am * b0 / m * nf * nf.ln(),
        _ => am * b0 * lambda * lambda / (m * (1.0 - lambda).powi(2) * (1.0 - 2.0 * lambda)) * nf,
    };
    variance.sqrt()
}

/// Standardised final values `(W_n - centre) / sqrt(v(n))` for a small or
/// critical index urn, with `v(n)` the leading variance term.
pub fn standardized_finals(config: &SimulationConfig, centering: Centering) -> Result<Vec<f64>> {
    let (params, class) = regime_of(config)?;
    let n = config.n_steps;
    let nf = n as f64;
    let lambda = params.lambda_f64();
    if !matches!(class.regime, Regime::SmallIndex | Regime::CriticalIndex) {
        return Err(Error::Unsupported(format!("CLT check needs a small or critical index, not {}", class.regime)));
    }
    if n < 2 {
        return Err(Error::Domain("CLT check needs at least two steps".into()));
    }
    let centre = if centering.use_exact(n) {
        NumericSeries::compute(&params, config.model, config.t0(), config.w0, n as usize)?.mean[n as usize]
    } else {
        params.a_m as f64 * nf / (1.0 - lambda)
    };
    let mut sim = config.clone();
    sim.record = RecordOptions::final_only();
    sim.checkpoints = Checkpoints::Final;
    let out = run(&sim)?;
    let sd = standard_deviation(&params, class.regime, n);
    Ok(out.traces.iter().map(|t| (*t.white.last().expect("final value") as f64 - centre) / sd).collect())
}

/// KS test of the standardised `W_n` against `N(0, 1)`, at the 1% level for
/// small index and the 5% level for critical index.
pub fn verify_clt(config: &SimulationConfig, centering: Centering) -> Result<TestResult> {
    let (params, class) = regime_of(config)?;
    let z = standardized_finals(config, centering)?;
    let (level, c) = match class.regime {
        Regime::CriticalIndex => ("5%", KS_FIVE_PERCENT),
        _ => ("1%", KS_ONE_PERCENT),
    };
    let threshold = c / (config.replicates as f64).sqrt();
    let d = ks_statistic(&z);
    let centre = if centering.use_exact(config.n_steps) { "exact" } else { "asymptotic" };
    let span = lattice_step(&params) as f64 / standard_deviation(&params, class.regime, config.n_steps);
    let corrected = ks_statistic_lattice(&z, span);
    Ok(TestResult {
        name: "clt".into(),
        status: status(d < threshold),
        statistic: Some(d),
        threshold: Some(threshold),
        n: config.n_steps,
        replicates: config.replicates,
        seed: config.master_seed,
        note: format!(
            "{level} KS level, {centre} centring, lattice step {span:.4}, continuity-corrected D {corrected:.5}"
        ),
    })
}

/// `a_m / (a_m + b_0)`, checked against `a_m / (sigma (1 - L))`.
pub fn ratio_limit(params: &AffineParams) -> Result<Rational> {
    let one = Rational::one();
    let via_index = int(params.a_m) / (int(params.sigma) * (&one - &params.lambda));
    let direct = frac(params.a_m, params.a_m + params.b0);
    if via_index != direct {
        return Err(Error::Domain(format!("ratio limit mismatch: {via_index} vs {direct}")));
    }
    Ok(direct)
}

/// Across-replicate mean of `|W_n / T_n - limit|` at each recorded step.
pub fn ratio_deviation(output: &SimulationOutput, limit: f64) -> Vec<f64> {
    (0..output.steps.len())
        .map(|i| {
            let sum: f64 = output.traces.iter().map(|t| (t.ratio[i] - limit).abs()).sum();
            sum / output.traces.len() as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioOptions {
    pub epsilon: f64,
    /// Monotonicity is checked from this checkpoint on.
    pub monotone_from: u64,
}

impl Default for RatioOptions {
    fn default() -> Self {
        RatioOptions { epsilon: 0.01, monotone_from: 16 }
    }
}

/// First index `i >= 1` in `values` (restricted to `steps >= from`) with
/// `values[i] >= values[i-1]`.
fn first_increase(steps: &[u64], values: &[f64], from: u64) -> Option<u64> {
    let start = steps.iter().position(|&n| n >= from)?;
    (start + 1..values.len()).find(|&i| values[i] >= values[i - 1]).map(|i| steps[i])
}

/// Ratio convergence `W_n / T_n -> a_m / (a_m + b_0)` along dyadic checkpoints.
pub fn check_ratio_convergence(config: &SimulationConfig, options: RatioOptions) -> Result<TestResult> {
    let (params, class) = regime_of(config)?;
    if class.regime == Regime::Triangular || params.lambda >= Rational::one() {
        return Err(Error::Unsupported(format!(
            "ratio check needs a nontriangular urn with index < 1 ({}, index {})",
            class.regime, params.lambda
        )));
    }
    let limit = ratio_limit(&params)?;
    let e1 = ExpansionConstants::new(&params, config.t0(), config.w0).map(|k| k.e1 / params.sigma as f64);
    let limit_f = crate::rational::to_f64(&limit);
    let mut sim = config.clone();
    sim.record = RecordOptions { raw_path: false, ratio: true, martingale: false };
    let out = run(&sim)?;
    let dev = ratio_deviation(&out, limit_f);
    let last = *dev.last().expect("final checkpoint");
    let increase = first_increase(&out.steps, &dev, options.monotone_from);
    let mut note = format!("limit {limit}");
    if let Ok(slope) = e1 {
        let _ = write!(note, ", E1/sigma {slope:.17e}");
    }
    if let Some(n) = increase {
        let _ = write!(note, ", deviation does not decrease at n = {n}");
    }
    Ok(TestResult {
        name: "ratio".into(),
        status: status(last < options.epsilon && increase.is_none()),
        statistic: Some(last),
        threshold: Some(options.epsilon),
        n: config.n_steps,
        replicates: config.replicates,
        seed: config.master_seed,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Options {
    /// Final increment must be below this fraction of the final variance.
    pub fraction: f64,
    /// Relative tolerance on `V[W_n] ~ C Q^2`.
    pub constant_tolerance: f64,
    /// Truncation tolerance for `C`.
    pub series_tolerance: f64,
    pub monotone_from: u64,
}

impl Default for L2Options {
    fn default() -> Self {
        L2Options { fraction: 0.05, constant_tolerance: 0.10, series_tolerance: 1e-6, monotone_from: 8 }
    }
}

/// `E[(X_{n_{i+1}} - X_{n_i})^2]` over consecutive recorded steps.
pub fn squared_increments(columns: &[&Vec<f64>]) -> Vec<f64> {
    let len = columns.first().map_or(0, |c| c.len());
    (1..len)
        .map(|i| columns.iter().map(|c| (c[i] - c[i - 1]).powi(2)).sum::<f64>() / columns.len() as f64)
        .collect()
}

/// L2 (Cauchy) convergence of the martingale `g_n (W_n - E[W_n])`, or of
/// `g_n W_n` for triangular urns. Large-index urns also get a comparison of
/// `V[g_n (W_n - E W_n)]` with `C Q^2`.
pub fn check_l2_convergence(config: &SimulationConfig, options: L2Options) -> Result<Vec<TestResult>> {
    let (params, class) = regime_of(config)?;
    let half = frac(1, 2);
    let triangular = class.regime == Regime::Triangular;
    let large = class.regime == Regime::LargeIndex && params.lambda > half && params.lambda < Rational::one();
    if !(large || triangular) {
        return Err(Error::Unsupported(format!(
            "L2 check needs a large-index or triangular urn, not {}",
            class.regime
        )));
    }
    if class.restart_required {
        return Err(Error::RestartRequired { value: config.t0() + params.shift() });
    }
    let mut sim = config.clone();
    sim.record = RecordOptions { raw_path: false, ratio: false, martingale: true };
    sim.checkpoints = Checkpoints::Dyadic;
    let out = run(&sim)?;
    let columns: Vec<&Vec<f64>> = out
        .traces
        .iter()
        .map(|t| if triangular { &t.martingale_frak } else { &t.martingale_w })
        .collect();
    let increments = squared_increments(&columns);
    let last = columns.first().map_or(0, |c| c.len()) - 1;
    let (_, final_var) = mean_var(columns.iter().map(|c| c[last]));
    let final_inc = *increments.last().expect("at least one increment");
    let threshold = options.fraction * final_var;
    let increase = first_increase(&out.steps[1..], &increments, options.monotone_from);
    let label = if triangular { "g_n W_n" } else { "g_n (W_n - E W_n)" };
    let mut note = format!("martingale {label}, V = {final_var:.6e}");
    if let Some(n) = increase {
        let _ = write!(note, ", increment does not decrease at n = {n}");
    }
    let mut results = vec![TestResult {
        name: "l2-cauchy".into(),
        status: status(final_inc < threshold && increase.is_none()),
        statistic: Some(final_inc),
        threshold: Some(threshold),
        n: config.n_steps,
        replicates: config.replicates,
        seed: config.master_seed,
        note,
    }];
    if large {
        let c = large_index_constant(&params, config.model, config.t0(), config.w0, options.series_tolerance)?;
        let q = ExpansionConstants::new(&params, config.t0(), config.w0)?.q;
        let target = c.c * q * q;
        let rel = (final_var - target).abs() / target;
        results.push(TestResult {
            name: "l2-constant".into(),
            status: status(rel < options.constant_tolerance),
            statistic: Some(rel),
            threshold: Some(options.constant_tolerance),
            n: config.n_steps,
            replicates: config.replicates,
            seed: config.master_seed,
            note: format!("empirical V {final_var:.6e}, C Q^2 {target:.6e} (C {:.6e} +- {:.1e})", c.c, c.truncation_bound),
        });
    }
    Ok(results)
}

/// Sizes and thresholds of the regime battery.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Horizon of the CLT test; by default 2000 for small and 5000 for critical index.
    pub clt_steps: Option<u64>,
    pub clt_replicates: u64,
    pub centering: Centering,
    pub ratio_steps: u64,
    pub ratio_replicates: u64,
    pub ratio: RatioOptions,
    pub l2_steps: u64,
    pub l2_replicates: u64,
    pub l2: L2Options,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            clt_steps: None,
            clt_replicates: 10_000,
            centering: Centering::Auto,
            ratio_steps: 100_000,
            ratio_replicates: 1_000,
            ratio: RatioOptions::default(),
            l2_steps: 100_000,
            l2_replicates: 1_000,
            l2: L2Options::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub urn: String,
    pub model: String,
    pub w0: i64,
    pub b0: i64,
    pub index: Option<Rational>,
    pub regime: Option<Regime>,
    pub tests: Vec<TestResult>,
}

impl VerificationReport {
    /// True when no test failed; unsupported tests do not count.
    pub fn passed(&self) -> bool {
        self.tests.iter().all(|t| t.status != Status::Fail)
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "urn = {}", self.urn);
        let _ = writeln!(s, "model = {}", self.model);
        let _ = writeln!(s, "W0 = {}", self.w0);
        let _ = writeln!(s, "B0 = {}", self.b0);
        if let Some(l) = &self.index {
            let _ = writeln!(s, "index = {l}");
        }
        if let Some(r) = self.regime {
            let _ = writeln!(s, "regime = {r}");
        }
        for t in &self.tests {
            let p = format!("test.{}", t.name);
            let _ = writeln!(s, "{p}.status = {}", t.status);
            if let Some(x) = t.statistic {
                let _ = writeln!(s, "{p}.statistic = {}", crate::rational::format_f64(x));
            }
            if let Some(x) = t.threshold {
                let _ = writeln!(s, "{p}.threshold = {}", crate::rational::format_f64(x));
            }
            let _ = writeln!(s, "{p}.n = {}", t.n);
            let _ = writeln!(s, "{p}.replicates = {}", t.replicates);
            let _ = writeln!(s, "{p}.seed = {}", t.seed);
            if !t.note.is_empty() {
                let _ = writeln!(s, "{p}.note = {}", t.note);
            }
        }
        let _ = writeln!(s, "result = {}", if self.passed() { "pass" } else { "fail" });
        s
    }
}

fn sized(config: &SimulationConfig, steps: u64, replicates: u64, seed: u64) -> SimulationConfig {
    let mut c = config.clone();
    c.n_steps = steps;
    c.replicates = replicates;
    c.master_seed = seed;
    c
}

fn or_unsupported(name: &str, config: &SimulationConfig, r: Result<TestResult>) -> Result<TestResult> {
    match r {
        Ok(t) => Ok(t),
        Err(Error::Unsupported(why)) => Ok(TestResult::unsupported(name, config, why)),
        Err(e) => Err(e),
    }
}

/// Runs the tests that apply to the urn's regime; the rest are listed as
/// unsupported. `config` supplies the urn, model and start; sizes and seed
/// come from `options`.
pub fn verify_battery(config: &SimulationConfig, options: &VerifyOptions) -> Result<VerificationReport> {
    config.validate()?;
    let affinity = check_affinity(&config.matrix);
    let urn = format!("a = {:?}, sigma = {}", config.matrix.a(), config.matrix.sigma());
    let mut report = VerificationReport {
        urn,
        model: config.model.to_string(),
        w0: config.w0,
        b0: config.b0,
        index: None,
        regime: None,
        tests: Vec::new(),
    };
    let Some(params) = affinity.params() else {
        report.tests.push(TestResult::unsupported("battery", config, "the urn is not affine".into()));
        return Ok(report);
    };
    let class = classify(params, config.t0());
    report.index = Some(params.lambda.clone());
    report.regime = Some(class.regime);

    let clt_steps = options.clt_steps.unwrap_or(match class.regime {
        Regime::CriticalIndex => 5_000,
        _ => 2_000,
    });
    let clt_cfg = sized(config, clt_steps, options.clt_replicates, options.seed);
    report.tests.push(or_unsupported("clt", &clt_cfg, verify_clt(&clt_cfg, options.centering))?);

    let ratio_cfg = sized(config, options.ratio_steps, options.ratio_replicates, options.seed);
    report.tests.push(or_unsupported("ratio", &ratio_cfg, check_ratio_convergence(&ratio_cfg, options.ratio))?);

    let l2_cfg = sized(config, options.l2_steps, options.l2_replicates, options.seed);
    match check_l2_convergence(&l2_cfg, options.l2) {
        Ok(results) => report.tests.extend(results),
        Err(Error::Unsupported(why)) => report.tests.push(TestResult::unsupported("l2-cauchy", &l2_cfg, why)),
        Err(Error::RestartRequired { value }) => report.tests.push(TestResult::unsupported(
            "l2-cauchy",
            &l2_cfg,
            format!("T0 + m(a_(m-1) - a_m) = {value} <= 0, the martingale normalisation is undefined"),
        )),
        Err(e) => return Err(e),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ReplacementMatrix, SamplingModel};
    use crate::rng::{replicate_stream, unit_f64};
    use statrs::distribution::{ContinuousCDF, Normal};

    fn friedman() -> SimulationConfig {
        let p = AffineParams::new(2, 1, 2, 2).unwrap();
        SimulationConfig::new(p.matrix(), SamplingModel::WithReplacement, 1, 1, 100)
    }

    #[test]
    fn ks_of_zeros_is_half() {
        assert_eq!(ks_statistic(&[0.0; 10]), 0.5);
    }

    #[test]
    fn ks_of_optimal_quantiles() {
        let n = 1000;
        let normal = Normal::new(0.0, 1.0).unwrap();
        let xs: Vec<f64> = (1..=n).map(|i| normal.inverse_cdf((i as f64 - 0.5) / n as f64)).collect();
        let d = ks_statistic(&xs);
        assert!((d - 0.5 / n as f64).abs() < 1e-12, "{d}");
    }

    #[test]
    fn lattice_correction_removes_rounding_bias() {
        let n = 10_000;
        let h = 0.1;
        let normal = Normal::new(0.0, 1.0).unwrap();
        let xs: Vec<f64> = (1..=n)
            .map(|i| (normal.inverse_cdf((i as f64 - 0.5) / n as f64) / h).round() * h)
            .collect();
        let plain = ks_statistic(&xs);
        let corrected = ks_statistic_lattice(&xs, h);
        assert!(plain > 0.015, "{plain}");
        assert!(corrected < 1e-3, "{corrected}");
    }

    #[test]
    fn ks_of_far_point_tends_to_one() {
        assert!(ks_statistic(&[1e6]) > 1.0 - 1e-12);
    }

    #[test]
    fn normal_cdf_values() {
        // mpmath ncdf
        assert!((normal_cdf(1.0) - 0.84134474606854293).abs() < 1e-15);
        assert!((normal_cdf(-3.0) - 0.0013498980316300946).abs() < 1e-17);
        assert_eq!(normal_cdf(0.0), 0.5);
    }

    #[test]
    fn ks_harness_calibration() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let r = 10_000;
        let threshold = KS_ONE_PERCENT / (r as f64).sqrt();
        let passes = (0..100u64)
            .filter(|&rep| {
                let mut rng = replicate_stream(2024, rep);
                let xs: Vec<f64> = (0..r).map(|_| normal.inverse_cdf(unit_f64(&mut rng).max(1e-300))).collect();
                ks_statistic(&xs) < threshold
            })
            .count();
        assert!(passes >= 95, "{passes}");
    }

    #[test]
    fn ratio_limit_identity() {
        let friedman = AffineParams::new(2, 1, 2, 2).unwrap();
        assert_eq!(ratio_limit(&friedman).unwrap(), frac(1, 2));
        let critical = AffineParams::new(2, 2, 1, 4).unwrap();
        assert_eq!(ratio_limit(&critical).unwrap(), frac(1, 2));
    }

    #[test]
    fn wrong_regimes_are_unsupported() {
        let degenerate = ReplacementMatrix::new(vec![1, 1, 1], 2).unwrap();
        let cfg = SimulationConfig::new(degenerate, SamplingModel::WithReplacement, 2, 2, 10);
        assert!(matches!(verify_clt(&cfg, Centering::Auto), Err(Error::Unsupported(_))));
        let polya = AffineParams::new(2, 1, 0, 2).unwrap();
        let cfg = SimulationConfig::new(polya.matrix(), SamplingModel::WithReplacement, 2, 2, 10);
        assert!(matches!(check_ratio_convergence(&cfg, RatioOptions::default()), Err(Error::Unsupported(_))));
        assert!(matches!(check_l2_convergence(&friedman(), L2Options::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn friedman_clt_small_run() {
        let mut cfg = friedman();
        cfg.n_steps = 500;
        cfg.replicates = 2000;
        cfg.master_seed = 11;
        let t = verify_clt(&cfg, Centering::Exact).unwrap();
        assert!(t.passed(), "{t:?}");
        let again = verify_clt(&cfg, Centering::Exact).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn triangular_routes_to_frak() {
        let polya = AffineParams::new(2, 1, 0, 2).unwrap();
        let mut cfg = SimulationConfig::new(polya.matrix(), SamplingModel::WithoutReplacement, 2, 2, 4096);
        cfg.replicates = 400;
        let res = check_l2_convergence(&cfg, L2Options::default()).unwrap();
        assert_eq!(res.len(), 1);
        assert!(res[0].note.contains("g_n W_n"));
    }

    #[test]
    fn battery_marks_unsupported_tests() {
        let options = VerifyOptions {
            clt_replicates: 200,
            ratio_steps: 2048,
            ratio_replicates: 100,
            l2_steps: 256,
            l2_replicates: 10,
            ..VerifyOptions::default()
        };
        let report = verify_battery(&friedman(), &options).unwrap();
        let names: Vec<_> = report.tests.iter().map(|t| (t.name.as_str(), t.status)).collect();
        assert_eq!(names[2], ("l2-cauchy", Status::Unsupported));
        assert!(report.to_key_value().contains("regime = small-index"));
    }
}
