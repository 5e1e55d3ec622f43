//! Subcommand implementations. Each returns the process exit code.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use multidraw::asymptotics::variance_asymptotic;
use multidraw::export::{self, Predictions};
use multidraw::model::{Regime, TenabilityReport};
use multidraw::oracle::{conditional_mean_check, evolve_all, oracle_moments};
use multidraw::simulate::{self, RecordOptions, SimulationConfig};
use multidraw::{
    check_affinity, classify, identify_family, validate_tenability, verify, AffineParams, Affinity, Error,
    ExactMomentSeries, NumericSeries, SamplingModel,
};

use crate::config::{Engine, Experiment};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_NONAFFINE: i32 = 2;
pub const EXIT_NONTENABLE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// A failed command: exit code and message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotTenable(_) => EXIT_NONTENABLE,
            _ => EXIT_PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_PARSE, format!("i/o error: {e}"))
    }
}

pub type Outcome = Result<i32, Failure>;

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn tenability_line(report: &TenabilityReport) -> String {
    if report.is_tenable() {
        "yes".into()
    } else {
        format!("no ({})", report.diagnostics().join("; "))
    }
}

/// Order of `E[W_n]`, of `V[W_n]` and the limit law for a nontriangular regime.
pub fn table_row(regime: Regime) -> Option<(&'static str, &'static str, &'static str)> {
    match regime {
        Regime::SmallIndex => Some(("n", "n", "(W_n - E[W_n]) / sqrt(V[W_n]) -> N(0, 1)")),
        Regime::CriticalIndex => Some(("n", "n log n", "(W_n - E[W_n]) / sqrt(V[W_n]) -> N(0, 1)")),
        Regime::LargeIndex => Some(("n", "n^(2 index)", "g_n (W_n - E[W_n]) -> W_inf almost surely")),
        Regime::Degenerate | Regime::Triangular => None,
    }
}

fn affine_params(exp: &Experiment) -> Result<AffineParams, Failure> {
    match check_affinity(&exp.matrix) {
        Affinity::Affine(p) => Ok(p),
        Affinity::NotAffine { k, expected, actual } => Err(Failure::new(
            EXIT_NONAFFINE,
            format!("the urn is not affine: row {k} has a_{k} = {actual}, the affine relation needs {expected}"),
        )),
    }
}

fn require_tenable(exp: &Experiment, model: SamplingModel) -> Result<(), Failure> {
    let report = validate_tenability(&exp.matrix, model);
    if report.is_tenable() {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_NONTENABLE,
            format!("the urn is not tenable under model {model}: {}", report.diagnostics().join("; ")),
        ))
    }
}

fn start(exp: &Experiment) -> Result<(i64, i64), Failure> {
    exp.start().map_err(|m| Failure::new(EXIT_PARSE, m))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn classify_cmd(exp: &Experiment, out: &mut dyn Write) -> Outcome {
    let m = &exp.matrix;
    writeln!(out, "a = {:?}", m.a())?;
    writeln!(out, "b = {:?}", (0..=m.m()).map(|k| m.b_k(k)).collect::<Vec<_>>())?;
    writeln!(out, "sigma = {}", m.sigma())?;
    writeln!(out, "m = {}", m.m())?;
    if let Some(p) = &exp.preset {
        writeln!(out, "preset = {p}")?;
    }
    if let Some(f) = identify_family(m) {
        writeln!(out, "family = {f}")?;
    }
    let reports: Vec<_> = SamplingModel::ALL.iter().map(|&model| (model, validate_tenability(m, model))).collect();
    for (model, report) in &reports {
        writeln!(out, "tenable.{model} = {}", tenability_line(report))?;
    }
    let params = match check_affinity(m) {
        Affinity::Affine(p) => p,
        Affinity::NotAffine { k, expected, actual } => {
            writeln!(out, "affine = no (row {k}: a_{k} = {actual}, affine value {expected})")?;
            return Ok(EXIT_NONAFFINE);
        }
    };
    writeln!(out, "affine = yes (a_(m-1) = {}, a_m = {})", params.a_m_minus_1, params.a_m)?;
    writeln!(out, "index = {}", params.lambda)?;
    writeln!(out, "b0 = {}", params.b0)?;
    let t0 = exp.w0.zip(exp.b0).map(|(w, b)| w + b);
    let class = classify(&params, t0.unwrap_or(i64::MAX / 2));
    writeln!(out, "regime = {}", class.regime)?;
    match t0 {
        Some(t0) => writeln!(
            out,
            "restart_required = {} (T0 + m(a_(m-1) - a_m) = {})",
            yes_no(class.restart_required),
            t0 + params.shift()
        )?,
        None => writeln!(out, "restart_required = unknown (no initial composition)")?,
    }
    match table_row(class.regime) {
        Some((e, v, law)) => {
            writeln!(out, "table.mean = {e}")?;
            writeln!(out, "table.variance = {v}")?;
            writeln!(out, "table.limit_law = {law}")?;
        }
        None => writeln!(out, "table = not covered ({} urn)", class.regime)?,
    }
    let tenable = match exp.model {
        Some(model) => reports.iter().any(|(mm, r)| *mm == model && r.is_tenable()),
        None => reports.iter().any(|(_, r)| r.is_tenable()),
    };
    Ok(if tenable { EXIT_OK } else { EXIT_NONTENABLE })
}

fn predictions_apply(params: &AffineParams, regime: Regime) -> bool {
    !matches!(regime, Regime::Degenerate | Regime::Triangular) && params.a_m != 0
}

pub fn exact_cmd(exp: &Experiment, out_dir: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let params = affine_params(exp)?;
    let model = exp.model_or_default();
    require_tenable(exp, model)?;
    let (w0, b0) = start(exp)?;
    let t0 = w0 + b0;
    let class = classify(&params, t0);
    let applies = predictions_apply(&params, class.regime);
    let asym = if applies { variance_asymptotic(&params, model, t0, w0, exp.exact.tolerance).ok() } else { None };
    let predictions = Predictions { variance: asym.as_ref(), mean: applies };
    if class.restart_required {
        writeln!(
            err,
            "note: T0 + m(a_(m-1) - a_m) = {} <= 0, so g_n is undefined and the g columns are empty",
            t0 + params.shift()
        )?;
    }
    let mut sink: Box<dyn Write + '_> = match out_dir {
        Some(dir) => Box::new(create(dir, "exact.csv")?),
        None => Box::new(&mut *out),
    };
    match exp.exact.engine {
        Engine::Exact => {
            let series = ExactMomentSeries::compute(&params, model, t0, w0, exp.exact.n_max)?;
            export::write_exact_series(&mut sink, &series, &predictions)?;
        }
        Engine::Numeric => {
            let series = NumericSeries::compute(&params, model, t0, w0, exp.exact.n_max)?;
            export::write_numeric_series(&mut sink, &series, &params, t0, w0, &predictions)?;
        }
    }
    sink.flush()?;
    drop(sink);
    if exp.exact.oracle_check {
        return oracle_cmd(exp, None, err);
    }
    Ok(EXIT_OK)
}

/// Exact moments against the DP oracle and the conditional-mean identities.
pub fn oracle_cmd(exp: &Experiment, out_dir: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let params = affine_params(exp)?;
    let model = exp.model_or_default();
    require_tenable(exp, model)?;
    let (w0, b0) = start(exp)?;
    let t0 = w0 + b0;
    let n_max = exp.oracle.n_max.max(exp.oracle.martingale_steps);
    let laws = evolve_all(&exp.matrix, model, w0, b0, n_max)?;
    let series = ExactMomentSeries::compute(&params, model, t0, w0, exp.oracle.n_max)?;
    let mut ok = true;
    for n in 0..=exp.oracle.n_max {
        let (mean, second) = oracle_moments(&laws[n]);
        let hit = mean == series.mean[n] && second == series.second[n];
        ok &= hit;
        writeln!(
            out,
            "moments n = {n}: {} (E = {}, E2 = {})",
            if hit { "equal" } else { "DIFFER" },
            series.mean[n],
            series.second[n]
        )?;
    }
    for n in 1..=exp.oracle.martingale_steps {
        let outcome = conditional_mean_check(&exp.matrix, model, &laws[n - 1], t0)?;
        ok &= outcome.holds;
        let what = if outcome.martingale_checked { "affine mean and martingale" } else { "affine mean" };
        match outcome.witness {
            None => writeln!(out, "conditional n = {n}: {what} hold")?,
            Some(wit) => writeln!(
                out,
                "conditional n = {n}: FAILS at W = {} ({} vs {})",
                wit.w, wit.conditional_mean, wit.expected
            )?,
        }
    }
    if let Some(dir) = out_dir {
        let mut f = create(dir, "oracle.csv")?;
        for (i, law) in laws.iter().enumerate() {
            let mut buf = Vec::new();
            export::write_distribution(&mut buf, law)?;
            // header only once
            let text = String::from_utf8(buf).expect("csv is utf-8");
            let body = if i == 0 { text.as_str() } else { text.split_once("\r\n").map_or("", |(_, rest)| rest) };
            f.write_all(body.as_bytes())?;
        }
        f.flush()?;
    }
    writeln!(out, "result = {}", if ok { "pass" } else { "fail" })?;
    Ok(if ok { EXIT_OK } else { EXIT_VERIFY })
}

pub fn simulation_config(exp: &Experiment) -> Result<SimulationConfig, Failure> {
    let (w0, b0) = start(exp)?;
    let mut cfg = SimulationConfig::new(exp.matrix.clone(), exp.model_or_default(), w0, b0, exp.simulate.n_steps);
    cfg.replicates = exp.simulate.replicates;
    cfg.master_seed = exp.simulate.seed;
    cfg.checkpoints = exp.checkpoints.clone();
    cfg.record = RecordOptions {
        raw_path: exp.simulate.raw_path,
        ratio: exp.simulate.ratio,
        martingale: exp.simulate.martingale,
    };
    Ok(cfg)
}

pub fn simulate_cmd(exp: &Experiment, out_dir: &Path, err: &mut dyn Write) -> Outcome {
    require_tenable(exp, exp.model_or_default())?;
    let cfg = simulation_config(exp)?;
    let output = simulate::run(&cfg)?;
    if cfg.record.martingale && output.compensators.is_none() {
        writeln!(err, "note: martingale columns omitted (non-affine urn or T0 + m(a_(m-1) - a_m) <= 0)")?;
    }
    let exact_mean: Option<Vec<f64>> = check_affinity(&cfg.matrix).params().and_then(|p| {
        let s = NumericSeries::compute(p, cfg.model, cfg.t0(), cfg.w0, cfg.n_steps as usize).ok()?;
        Some(output.steps.iter().map(|&n| s.mean[n as usize]).collect())
    });
    let mut trace = create(out_dir, "trace.csv")?;
    export::write_trace(&mut trace, &output)?;
    trace.flush()?;
    let mut summary = create(out_dir, "summary.csv")?;
    export::write_summary(&mut summary, &simulate::summarize(&output), exact_mean.as_deref())?;
    summary.flush()?;
    Ok(EXIT_OK)
}

pub fn verify_cmd(exp: &Experiment, out_dir: Option<&Path>, out: &mut dyn Write) -> Outcome {
    affine_params(exp)?;
    require_tenable(exp, exp.model_or_default())?;
    let cfg = simulation_config(exp)?;
    let report = verify::verify_battery(&cfg, &exp.verify)?;
    out.write_all(report.to_key_value().as_bytes())?;
    if let Some(dir) = out_dir {
        let mut f = create(dir, "report.csv")?;
        export::write_report(&mut f, &report)?;
        f.flush()?;
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY })
}

/// Default directory for simulation output.
pub fn default_out_dir() -> PathBuf {
    PathBuf::from(".")
}
