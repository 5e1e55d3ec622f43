//! CSV output. Exact values are written as `p/q`, approximations with 17
//! significant digits.

use std::io::Write;

use crate::asymptotics::{mean_asymptotic, VarianceAsymptotic};
use crate::error::Result;
use crate::exact::ExactMomentSeries;
use crate::numeric::NumericSeries;
use crate::oracle::StateDistribution;
use crate::rational::{format_f64, to_decimal, to_pq, Rational};
use crate::simulate::{CheckpointSummary, SimulationOutput};
use crate::verify::VerificationReport;

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out)
}

fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

/// Leading-order predictions appended to the moment columns.
pub struct Predictions<'a> {
    pub variance: Option<&'a VarianceAsymptotic>,
    /// Whether `E1 n + E2 n^L + E3` applies.
    pub mean: bool,
}

impl Predictions<'_> {
    fn row(&self, series_params: &crate::model::AffineParams, t0: i64, w0: i64, n: usize) -> [String; 2] {
        let nf = n as f64;
        let mean = if self.mean && n > 0 { mean_asymptotic(series_params, t0, w0, nf).ok() } else { None };
        let var = self.variance.filter(|_| n > 0).map(|v| v.predict(nf));
        [opt(mean), opt(var)]
    }
}

const MOMENT_PREDICTIONS: [&str; 2] = ["mean_asymptotic", "variance_asymptotic"];

pub fn write_exact_series<W: Write>(out: W, series: &ExactMomentSeries, predictions: &Predictions) -> Result<()> {
    let mut w = writer(out);
    let mut header = vec!["n", "mean", "mean_decimal", "second_moment", "variance", "variance_decimal", "g", "g_decimal"];
    header.extend(MOMENT_PREDICTIONS);
    w.write_record(&header)?;
    let pq_dec = |q: Option<&Rational>| match q {
        Some(q) => (to_pq(q), to_decimal(q)),
        None => (String::new(), String::new()),
    };
    for n in 0..=series.n_max() {
        let (g, g_dec) = pq_dec(series.g.as_ref().map(|g| &g[n]));
        let [pm, pv] = predictions.row(&series.params, series.t0, series.w0, n);
        w.write_record([
            n.to_string(),
            to_pq(&series.mean[n]),
            to_decimal(&series.mean[n]),
            to_pq(&series.second[n]),
            to_pq(&series.variance[n]),
            to_decimal(&series.variance[n]),
            g,
            g_dec,
            pm,
            pv,
        ])?;
    }
    Ok(w.flush()?)
}

pub fn write_numeric_series<W: Write>(
    out: W,
    series: &NumericSeries,
    params: &crate::model::AffineParams,
    t0: i64,
    w0: i64,
    predictions: &Predictions,
) -> Result<()> {
    let mut w = writer(out);
    let mut header = vec!["n", "mean_decimal", "variance_decimal", "g_decimal"];
    header.extend(MOMENT_PREDICTIONS);
    w.write_record(&header)?;
    for n in 0..=series.n_max() {
        let [pm, pv] = predictions.row(params, t0, w0, n);
        w.write_record([
            n.to_string(),
            format_f64(series.mean[n]),
            format_f64(series.variance[n]),
            opt(series.g.as_ref().map(|g| g[n])),
            pm,
            pv,
        ])?;
    }
    Ok(w.flush()?)
}

pub fn write_distribution<W: Write>(out: W, dist: &StateDistribution) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["n", "w", "p", "p_decimal"])?;
    for (white, p) in &dist.mass {
        w.write_record([dist.step.to_string(), white.to_string(), to_pq(p), to_decimal(p)])?;
    }
    Ok(w.flush()?)
}

/// Long format: one row per replicate and recorded step.
pub fn write_trace<W: Write>(out: W, output: &SimulationOutput) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["replicate", "n", "white", "ratio", "martingale", "martingale_frak"])?;
    for t in &output.traces {
        for (i, n) in output.steps.iter().enumerate() {
            w.write_record([
                t.replicate_id.to_string(),
                n.to_string(),
                t.white[i].to_string(),
                opt(t.ratio.get(i).copied()),
                opt(t.martingale_w.get(i).copied()),
                opt(t.martingale_frak.get(i).copied()),
            ])?;
        }
    }
    Ok(w.flush()?)
}

/// `exact_mean` is `E[W_n]` at the same steps when it is known.
pub fn write_summary<W: Write>(out: W, summary: &[CheckpointSummary], exact_mean: Option<&[f64]>) -> Result<()> {
    let mut w = writer(out);
    w.write_record([
        "n",
        "mean_white",
        "var_white",
        "exact_mean",
        "mean_ratio",
        "mean_martingale",
        "var_martingale",
        "mean_frak",
        "var_frak",
    ])?;
    for (i, s) in summary.iter().enumerate() {
        w.write_record([
            s.n.to_string(),
            format_f64(s.mean_w),
            format_f64(s.var_w),
            opt(exact_mean.map(|e| e[i])),
            opt(s.mean_ratio),
            opt(s.mean_martingale),
            opt(s.var_martingale),
            opt(s.mean_frak),
            opt(s.var_frak),
        ])?;
    }
    Ok(w.flush()?)
}

pub fn write_report<W: Write>(out: W, report: &VerificationReport) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["test", "status", "statistic", "threshold", "n", "replicates", "seed", "regime", "note"])?;
    let regime = report.regime.map(|r| r.name().to_string()).unwrap_or_default();
    for t in &report.tests {
        w.write_record([
            t.name.clone(),
            t.status.to_string(),
            opt(t.statistic),
            opt(t.threshold),
            t.n.to_string(),
            t.replicates.to_string(),
            t.seed.to_string(),
            regime.clone(),
            t.note.clone(),
        ])?;
    }
    Ok(w.flush()?)
}
