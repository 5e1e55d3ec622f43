//! Floating-point evaluation of the moment recurrences for long horizons.
//!
//! Exact rationals become impractical beyond a few thousand steps, so the
//! same recurrences are run in `f64`. The variance uses the centred form
//! `V_n = alpha_n V_{n-1} + D^2 E[Var(k | W_{n-1})]`, which avoids the
//! cancellation in `E[W_n^2] - E[W_n]^2`:
//!
//! * model M: `V_n = alpha_n V_{n-1} + D^2 m (T - m) / (T (T - 1)) * mu (T - mu) / T`
//! * model R: `V_n = alpha_n V_{n-1} + D^2 m * mu (T - mu) / T^2`
//!
//! with `T = T_{n-1}` and `mu = E[W_{n-1}]`.

use crate::error::Result;
use crate::exact::{check_positivity, check_start};
use crate::model::{AffineParams, SamplingModel};

#[derive(Debug, Clone)]
pub struct NumericSeries {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// `None` when `T0 + m(a_{m-1} - a_m) <= 0`.
    pub g: Option<Vec<f64>>,
}

impl NumericSeries {
    pub fn compute(params: &AffineParams, model: SamplingModel, t0: i64, w0: i64, n_max: usize) -> Result<Self> {
        check_start(params, t0, w0)?;
        let m = params.m as f64;
        let d = params.delta() as f64;
        let shift = params.shift() as f64;
        let am = params.a_m as f64;
        let sigma = params.sigma as f64;

        let mut mean = Vec::with_capacity(n_max + 1);
        let mut variance = Vec::with_capacity(n_max + 1);
        let mut g = check_positivity(params, t0).ok().map(|_| Vec::with_capacity(n_max + 1));

        let (mut mu, mut v, mut gn) = (w0 as f64, 0.0f64, 1.0f64);
        mean.push(mu);
        variance.push(v);
        if let Some(g) = g.as_mut() {
            g.push(gn);
        }
        for n in 1..=n_max {
            let t = t0 as f64 + sigma * (n - 1) as f64;
            let spread = mu * (t - mu) / t;
            let (pair, noise) = match model {
                SamplingModel::WithoutReplacement => {
                    let pair = if params.m > 1 { m * (m - 1.0) / (t * (t - 1.0)) } else { 0.0 };
                    let noise = if params.m < t as usize { m * (t - m) / (t * (t - 1.0)) } else { 0.0 };
                    (pair, noise)
                }
                SamplingModel::WithReplacement => (m * (m - 1.0) / (t * t), m / t),
            };
            let alpha2 = 1.0 + d * d * pair + 2.0 * d * m / t;
            v = alpha2 * v + d * d * noise * spread;
            mu = mu * (1.0 + shift / t) + am;
            mean.push(mu);
            variance.push(v);
            if let Some(g) = g.as_mut() {
                gn *= t / (t + shift);
                g.push(gn);
            }
        }
        Ok(NumericSeries { mean, variance, g })
    }

    pub fn n_max(&self) -> usize {
        self.mean.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactMomentSeries;
    use crate::rational::to_f64;

    fn rel(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn agrees_with_exact_engine() {
        let urns = [
            (AffineParams::new(2, 1, 2, 2).unwrap(), 2, 1),
            (AffineParams::new(2, 2, 1, 4).unwrap(), 4, 2),
            (AffineParams::new(3, 3, 1, 8).unwrap(), 8, 4),
            (AffineParams::new(2, 1, 0, 2).unwrap(), 3, 1),
            (AffineParams::new(1, 1, 0, 1).unwrap(), 1, 1),
            (AffineParams::new(3, 2, 2, 3).unwrap(), 8, 5),
        ];
        for (p, t0, w0) in urns {
            for model in SamplingModel::ALL {
                let exact = ExactMomentSeries::compute(&p, model, t0, w0, 200).unwrap();
                let num = NumericSeries::compute(&p, model, t0, w0, 200).unwrap();
                for n in 0..=200 {
                    assert!(rel(num.mean[n], to_f64(&exact.mean[n])) < 1e-12, "{p:?} {model} n={n}");
                    assert!(rel(num.variance[n], to_f64(&exact.variance[n])) < 1e-12, "{p:?} {model} n={n}");
                }
                match (&num.g, &exact.g) {
                    (Some(a), Some(b)) => {
                        for n in 0..=200 {
                            assert!(rel(a[n], to_f64(&b[n])) < 1e-12);
                        }
                    }
                    (None, None) => {}
                    _ => panic!("g availability differs"),
                }
            }
        }
    }

    #[test]
    fn friedman_slope_at_long_horizon() {
        let p = AffineParams::new(2, 1, 2, 2).unwrap();
        for model in SamplingModel::ALL {
            let s = NumericSeries::compute(&p, model, 2, 1, 100_000).unwrap();
            let slope = s.variance[100_000] / 1e5;
            assert!((slope - 1.0 / 6.0).abs() < 0.02 / 6.0, "{model}: {slope}");
        }
    }
}
