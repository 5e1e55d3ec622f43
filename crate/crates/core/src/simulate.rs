//! Seeded Monte Carlo runs of the urn process.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::DrawSampler;
use crate::model::{check_affinity, validate_tenability, AffineParams, ReplacementMatrix, SamplingModel};
use crate::numeric::NumericSeries;
use crate::rational::{to_f64, Rational};
use crate::rng::replicate_stream;

/// What each replicate keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordOptions {
    /// Record every step instead of the checkpoints.
    pub raw_path: bool,
    pub ratio: bool,
    pub martingale: bool,
}

impl Default for RecordOptions {
    fn default() -> Self {
        RecordOptions { raw_path: false, ratio: true, martingale: true }
    }
}

impl RecordOptions {
    /// Only `W_n` at the final step.
    pub fn final_only() -> Self {
        RecordOptions { raw_path: false, ratio: false, martingale: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Checkpoints {
    /// `0, 1, 2, 4, 8, ...` plus the final step.
    Dyadic,
    /// Only the final step (and step 0).
    Final,
    List(Vec<u64>),
}

impl Checkpoints {
    pub fn resolve(&self, n_steps: u64) -> Vec<u64> {
        let mut out = match self {
            Checkpoints::Dyadic => {
                let mut v = vec![0];
                let mut n = 1u64;
                while n < n_steps {
                    v.push(n);
                    n *= 2;
                }
                v
            }
            Checkpoints::Final => vec![0],
            Checkpoints::List(list) => list.iter().copied().filter(|&n| n <= n_steps).collect(),
        };
        out.push(n_steps);
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub matrix: ReplacementMatrix,
    pub model: SamplingModel,
    pub w0: i64,
    pub b0: i64,
    pub n_steps: u64,
    pub replicates: u64,
    pub master_seed: u64,
    pub record: RecordOptions,
    pub checkpoints: Checkpoints,
}

impl SimulationConfig {
    pub fn new(matrix: ReplacementMatrix, model: SamplingModel, w0: i64, b0: i64, n_steps: u64) -> Self {
        SimulationConfig {
            matrix,
            model,
            w0,
            b0,
            n_steps,
            replicates: 1,
            master_seed: 0,
            record: RecordOptions::default(),
            checkpoints: Checkpoints::Dyadic,
        }
    }

    pub fn t0(&self) -> i64 {
        self.w0 + self.b0
    }

    pub fn validate(&self) -> Result<()> {
        let report = validate_tenability(&self.matrix, self.model);
        if !report.is_tenable() {
            return Err(Error::NotTenable(report.diagnostics().join("; ")));
        }
        if self.w0 < 0 || self.b0 < 0 {
            return Err(Error::Domain(format!("negative initial composition ({}, {})", self.w0, self.b0)));
        }
        if self.t0() < self.matrix.m() as i64 {
            return Err(Error::Domain(format!(
                "initial total {} is smaller than the sample size {}",
                self.t0(),
                self.matrix.m()
            )));
        }
        if self.replicates < 1 {
            return Err(Error::Domain("need at least one replicate".into()));
        }
        Ok(())
    }

    /// Steps at which values are stored.
    pub fn recorded_steps(&self) -> Vec<u64> {
        if self.record.raw_path {
            (0..=self.n_steps).collect()
        } else {
            self.checkpoints.resolve(self.n_steps)
        }
    }
}

/// One replicate at the recorded steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub replicate_id: u64,
    pub white: Vec<i64>,
    /// `W_n / T_n`.
    pub ratio: Vec<f64>,
    /// `g_n (W_n - E[W_n])`.
    pub martingale_w: Vec<f64>,
    /// `g_n W_n` when `a_m = 0`, or `g_n B_n` when `b_0 = 0`.
    pub martingale_frak: Vec<f64>,
}

/// Deterministic expectations shared by all replicates.
#[derive(Debug, Clone)]
pub struct Compensators {
    pub g: Vec<f64>,
    pub mean: Vec<f64>,
    pub frak: FrakColour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrakColour {
    White,
    Black,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub steps: Vec<u64>,
    pub traces: Vec<SimulationTrace>,
    /// `None` when the urn is not affine or `g_n` is undefined.
    pub compensators: Option<Compensators>,
}

/// `g_n` and `E[W_n]` at the recorded steps, for affine urns with `T0 + m(a_{m-1}-a_m) > 0`.
pub fn compensators(config: &SimulationConfig, steps: &[u64]) -> Option<Compensators> {
    let params = check_affinity(&config.matrix).params()?.clone();
    let series = NumericSeries::compute(&params, config.model, config.t0(), config.w0, config.n_steps as usize).ok()?;
    let g = series.g?;
    let frak = if params.b0 == 0 && params.a_m != 0 { FrakColour::Black } else { FrakColour::White };
    Some(Compensators {
        g: steps.iter().map(|&n| g[n as usize]).collect(),
        mean: steps.iter().map(|&n| series.mean[n as usize]).collect(),
        frak,
    })
}

fn is_triangular(params: Option<&AffineParams>) -> bool {
    params.is_some_and(|p| p.a_m == 0 || p.b0 == 0)
}

/// Runs every replicate. Replicate `i` uses stream `(master_seed, i)`, and the
/// output is ordered by replicate, so results do not depend on thread count.
pub fn run(config: &SimulationConfig) -> Result<SimulationOutput> {
    config.validate()?;
    let steps = config.recorded_steps();
    let comp = if config.record.martingale { compensators(config, &steps) } else { None };
    let affinity = check_affinity(&config.matrix);
    let triangular = is_triangular(affinity.params());
    let sampler = DrawSampler::new(config.model, config.matrix.m());
    let traces = (0..config.replicates)
        .into_par_iter()
        .map(|id| {
            let white = simulate_path(config, &sampler, &steps, id);
            finish_trace(config, id, white, &steps, comp.as_ref(), triangular)
        })
        .collect();
    Ok(SimulationOutput { steps, traces, compensators: comp })
}

/// `W_n` at `steps` for one replicate.
///
/// # Panics
///
/// If `W_n` leaves `0..=T_n`, which means the validator accepted an untenable urn.
pub fn simulate_path(config: &SimulationConfig, sampler: &DrawSampler, steps: &[u64], replicate_id: u64) -> Vec<i64> {
    let mut rng = replicate_stream(config.master_seed, replicate_id);
    let added: Vec<i64> = (0..=config.matrix.m()).map(|k| config.matrix.white_added(k)).collect();
    let sigma = config.matrix.sigma();
    let mut w = config.w0;
    let mut t = config.t0();
    let mut n = 0u64;
    let mut out = Vec::with_capacity(steps.len());
    for &target in steps {
        while n < target {
            let k = sampler.sample(w, t, &mut rng);
            w += added[k];
            t += sigma;
            n += 1;
            if w < 0 || w > t {
                panic!(
                    "replicate {replicate_id}, step {n}: W = {w} outside 0..={t} after drawing {k} white; the urn is not tenable"
                );
            }
        }
        out.push(w);
    }
    out
}

fn finish_trace(
    config: &SimulationConfig,
    replicate_id: u64,
    white: Vec<i64>,
    steps: &[u64],
    comp: Option<&Compensators>,
    triangular: bool,
) -> SimulationTrace {
    let sigma = config.matrix.sigma() as f64;
    let t0 = config.t0() as f64;
    let ratio = if config.record.ratio {
        white.iter().zip(steps).map(|(&w, &n)| w as f64 / (t0 + sigma * n as f64)).collect()
    } else {
        Vec::new()
    };
    let (martingale_w, martingale_frak) = match comp {
        Some(c) => {
            let mw = white.iter().zip(&c.g).zip(&c.mean).map(|((&w, g), e)| g * (w as f64 - e)).collect();
            let frak = if triangular {
                white
                    .iter()
                    .zip(steps)
                    .zip(&c.g)
                    .map(|((&w, &n), g)| match c.frak {
                        FrakColour::White => g * w as f64,
                        FrakColour::Black => g * (t0 + sigma * n as f64 - w as f64),
                    })
                    .collect()
            } else {
                Vec::new()
            };
            (mw, frak)
        }
        None => (Vec::new(), Vec::new()),
    };
    SimulationTrace { replicate_id, white, ratio, martingale_w, martingale_frak }
}

/// `(g_n (W_n - E[W_n]), g_n W_n)` from exact `g` and `E[W_n]` at the same steps.
pub fn martingale_transform(white: &[i64], g: &[Rational], mean: &[Rational]) -> Result<(Vec<f64>, Vec<f64>)> {
    if g.len() != white.len() {
        return Err(Error::LengthMismatch { expected: white.len(), actual: g.len() });
    }
    if mean.len() != white.len() {
        return Err(Error::LengthMismatch { expected: white.len(), actual: mean.len() });
    }
    let g: Vec<f64> = g.iter().map(to_f64).collect();
    let mw = white.iter().zip(&g).zip(mean).map(|((&w, g), e)| g * (w as f64 - to_f64(e))).collect();
    let frak = white.iter().zip(&g).map(|(&w, g)| g * w as f64).collect();
    Ok((mw, frak))
}

/// Across-replicate statistics at one recorded step.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointSummary {
    pub n: u64,
    pub mean_w: f64,
    pub var_w: f64,
    pub mean_ratio: Option<f64>,
    pub mean_martingale: Option<f64>,
    pub var_martingale: Option<f64>,
    pub mean_frak: Option<f64>,
    pub var_frak: Option<f64>,
}

/// Sample mean and unbiased variance.
pub fn mean_var(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (count, sum) = values.clone().fold((0usize, 0.0f64), |(c, s), x| (c + 1, s + x));
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = sum / count as f64;
    if count == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (count - 1) as f64)
}

pub fn summarize(output: &SimulationOutput) -> Vec<CheckpointSummary> {
    let traces = &output.traces;
    let column = |i: usize, pick: fn(&SimulationTrace) -> &Vec<f64>| -> Option<(f64, f64)> {
        if traces.first().is_none_or(|t| pick(t).is_empty()) {
            return None;
        }
        Some(mean_var(traces.iter().map(move |t| pick(t)[i])))
    };
    output
        .steps
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let (mean_w, var_w) = mean_var(traces.iter().map(|t| t.white[i] as f64));
            let mart = column(i, |t| &t.martingale_w);
            let frak = column(i, |t| &t.martingale_frak);
            CheckpointSummary {
                n,
                mean_w,
                var_w,
                mean_ratio: column(i, |t| &t.ratio).map(|x| x.0),
                mean_martingale: mart.map(|x| x.0),
                var_martingale: mart.map(|x| x.1),
                mean_frak: frak.map(|x| x.0),
                var_frak: frak.map(|x| x.1),
            }
        })
        .collect()
}
