//! Experiment configuration files (TOML).
//!
//! ```toml
//! model = "M"          # or "R"
//! w0 = 2
//! b0 = 2
//!
//! [urn]
//! a = [3, 2, 1]        # white added when drawing k = 0..m white; b_k = sigma - a_k
//! sigma = 4
//! # or the affine shorthand: m = 2, a_m_minus_1 = 2, a_m = 1, sigma = 4
//!
//! [exact]
//! n_max = 50
//! ```
//!
//! `preset = "friedman m=2 c=1"` replaces the `[urn]` table and supplies the
//! model and initial composition, which the file may still override.

use std::path::Path;

use multidraw::simulate::Checkpoints;
use multidraw::verify::{Centering, L2Options, RatioOptions, VerifyOptions};
use multidraw::{ReplacementMatrix, SamplingModel};
use serde::Deserialize;

use crate::presets;

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub model: Option<String>,
    pub w0: Option<i64>,
    pub b0: Option<i64>,
    pub urn: Option<UrnSection>,
    #[serde(default)]
    pub exact: ExactSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UrnSection {
    pub a: Option<Vec<i64>>,
    pub sigma: i64,
    pub m: Option<usize>,
    pub a_m_minus_1: Option<i64>,
    pub a_m: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Rational arithmetic, every value exact.
    #[default]
    Exact,
    /// `f64` recurrences for long horizons.
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExactSection {
    pub n_max: usize,
    pub engine: Engine,
    pub oracle_check: bool,
    /// Truncation tolerance of the large-index constant.
    pub tolerance: f64,
}

impl Default for ExactSection {
    fn default() -> Self {
        ExactSection { n_max: 20, engine: Engine::Exact, oracle_check: false, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    /// Moments are compared for `n <= n_max`.
    pub n_max: usize,
    /// Conditional-mean identities are checked for `n <= martingale_steps`.
    pub martingale_steps: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection { n_max: 8, martingale_steps: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CheckpointSpec {
    Named(String),
    List(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub n_steps: u64,
    pub replicates: u64,
    pub seed: u64,
    pub checkpoints: CheckpointSpec,
    pub raw_path: bool,
    pub ratio: bool,
    pub martingale: bool,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            n_steps: 1000,
            replicates: 100,
            seed: 0,
            checkpoints: CheckpointSpec::Named("dyadic".into()),
            raw_path: false,
            ratio: true,
            martingale: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub seed: u64,
    pub clt_steps: Option<u64>,
    pub clt_replicates: u64,
    pub centering: String,
    pub ratio_steps: u64,
    pub ratio_replicates: u64,
    pub epsilon: f64,
    pub ratio_monotone_from: u64,
    pub l2_steps: u64,
    pub l2_replicates: u64,
    pub l2_fraction: f64,
    pub constant_tolerance: f64,
    pub series_tolerance: f64,
    pub l2_monotone_from: u64,
}

impl Default for VerifySection {
    fn default() -> Self {
        let v = VerifyOptions::default();
        VerifySection {
            seed: v.seed,
            clt_steps: v.clt_steps,
            clt_replicates: v.clt_replicates,
            centering: "auto".into(),
            ratio_steps: v.ratio_steps,
            ratio_replicates: v.ratio_replicates,
            epsilon: v.ratio.epsilon,
            ratio_monotone_from: v.ratio.monotone_from,
            l2_steps: v.l2_steps,
            l2_replicates: v.l2_replicates,
            l2_fraction: v.l2.fraction,
            constant_tolerance: v.l2.constant_tolerance,
            series_tolerance: v.l2.series_tolerance,
            l2_monotone_from: v.l2.monotone_from,
        }
    }
}

impl VerifySection {
    pub fn options(&self) -> Result<VerifyOptions, String> {
        let centering = match self.centering.to_ascii_lowercase().as_str() {
            "auto" => Centering::Auto,
            "exact" => Centering::Exact,
            "asymptotic" => Centering::Asymptotic,
            other => return Err(format!("verify.centering: expected auto, exact or asymptotic, got '{other}'")),
        };
        Ok(VerifyOptions {
            seed: self.seed,
            clt_steps: self.clt_steps,
            clt_replicates: self.clt_replicates,
            centering,
            ratio_steps: self.ratio_steps,
            ratio_replicates: self.ratio_replicates,
            ratio: RatioOptions { epsilon: self.epsilon, monotone_from: self.ratio_monotone_from },
            l2_steps: self.l2_steps,
            l2_replicates: self.l2_replicates,
            l2: L2Options {
                fraction: self.l2_fraction,
                constant_tolerance: self.constant_tolerance,
                series_tolerance: self.series_tolerance,
                monotone_from: self.l2_monotone_from,
            },
        })
    }
}

/// `dyadic`, `final`, or a comma-separated list of steps.
pub fn parse_checkpoints(text: &str) -> Result<Checkpoints, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "dyadic" => Ok(Checkpoints::Dyadic),
        "final" => Ok(Checkpoints::Final),
        list => list
            .split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| format!("checkpoint '{s}' is not a step number")))
            .collect::<Result<Vec<_>, _>>()
            .map(Checkpoints::List),
    }
}

impl CheckpointSpec {
    pub fn resolve(&self) -> Result<Checkpoints, String> {
        match self {
            CheckpointSpec::Named(s) => parse_checkpoints(s),
            CheckpointSpec::List(v) => Ok(Checkpoints::List(v.clone())),
        }
    }
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub model: Option<SamplingModel>,
    pub seed: Option<u64>,
    pub checkpoints: Option<String>,
    pub oracle_check: bool,
}

/// A config with the urn resolved.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub preset: Option<String>,
    pub matrix: ReplacementMatrix,
    /// `None` when neither file, preset nor flag names a model.
    pub model: Option<SamplingModel>,
    pub w0: Option<i64>,
    pub b0: Option<i64>,
    pub exact: ExactSection,
    pub oracle: OracleSection,
    pub simulate: SimulateSection,
    pub checkpoints: Checkpoints,
    pub verify: VerifyOptions,
}

impl Experiment {
    pub fn model_or_default(&self) -> SamplingModel {
        self.model.unwrap_or(SamplingModel::WithoutReplacement)
    }

    pub fn start(&self) -> Result<(i64, i64), String> {
        match (self.w0, self.b0) {
            (Some(w), Some(b)) => Ok((w, b)),
            _ => Err("the initial composition needs both w0 and b0".into()),
        }
    }
}

pub fn parse_file(text: &str) -> Result<ConfigFile, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

pub fn load(path: &Path) -> Result<ConfigFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_file(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn urn_matrix(urn: &UrnSection) -> Result<ReplacementMatrix, String> {
    let shorthand = [urn.m.is_some(), urn.a_m_minus_1.is_some(), urn.a_m.is_some()];
    match (&urn.a, shorthand) {
        (Some(a), [false, false, false]) => ReplacementMatrix::new(a.clone(), urn.sigma).map_err(|e| format!("urn: {e}")),
        (None, [true, true, true]) => ReplacementMatrix::from_affine(
            urn.m.expect("checked"),
            urn.a_m_minus_1.expect("checked"),
            urn.a_m.expect("checked"),
            urn.sigma,
        )
        .map_err(|e| format!("urn: {e}")),
        (Some(_), _) => Err("urn: give either 'a' or the affine shorthand (m, a_m_minus_1, a_m), not both".into()),
        (None, _) => Err("urn: the affine shorthand needs all of m, a_m_minus_1 and a_m".into()),
    }
}

/// Combines file, preset and flags; flags win over the file, the file over the preset.
pub fn resolve(file: ConfigFile, overrides: &Overrides) -> Result<Experiment, String> {
    let preset_spec = overrides.preset.clone().or(file.preset.clone());
    let preset = preset_spec.as_deref().map(presets::expand).transpose()?;
    let matrix = match (&preset, &file.urn) {
        (Some(_), Some(_)) => return Err("give either a preset or an [urn] table, not both".into()),
        (Some(p), None) => p.matrix.clone(),
        (None, Some(u)) => urn_matrix(u)?,
        (None, None) => return Err("no urn: give a preset or an [urn] table".into()),
    };
    let file_model = file
        .model
        .as_deref()
        .map(|s| s.parse::<SamplingModel>().map_err(|e| format!("model: {e}")))
        .transpose()?;
    let model = overrides.model.or(file_model).or(preset.as_ref().map(|p| p.model));
    let w0 = file.w0.or(preset.as_ref().map(|p| p.w0));
    let b0 = file.b0.or(preset.as_ref().map(|p| p.b0));

    let mut simulate = file.simulate;
    let mut verify = file.verify.options()?;
    if let Some(seed) = overrides.seed {
        simulate.seed = seed;
        verify.seed = seed;
    }
    let checkpoints = match &overrides.checkpoints {
        Some(text) => parse_checkpoints(text)?,
        None => simulate.checkpoints.resolve()?,
    };
    let mut exact = file.exact;
    exact.oracle_check |= overrides.oracle_check;
    Ok(Experiment {
        preset: preset.map(|p| p.name.to_string()),
        matrix,
        model,
        w0,
        b0,
        exact,
        oracle: file.oracle,
        simulate,
        checkpoints,
        verify,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_text(text: &str) -> Result<Experiment, String> {
        resolve(parse_file(text)?, &Overrides::default())
    }

    #[test]
    fn matrix_and_shorthand_agree() {
        let a = resolve_text("[urn]\na = [7, 5, 3, 1]\nsigma = 8\n").unwrap();
        let b = resolve_text("[urn]\nm = 3\na_m_minus_1 = 3\na_m = 1\nsigma = 8\n").unwrap();
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn exactly_one_urn_form() {
        assert!(resolve_text("[urn]\na = [1, 2]\nm = 1\nsigma = 3\n").is_err());
        assert!(resolve_text("[urn]\nm = 1\nsigma = 3\n").is_err());
        assert!(resolve_text("preset = \"polya\"\n[urn]\na = [1, 2]\nsigma = 3\n").is_err());
        assert!(resolve_text("w0 = 1\n").is_err());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = parse_file("model = \"M\"\nw0 = [\n").unwrap_err();
        assert!(err.contains("line 2") || err.contains("2:"), "{err}");
        let err = parse_file("modle = \"M\"\n").unwrap_err();
        assert!(err.contains("modle"), "{err}");
    }

    #[test]
    fn overrides_take_precedence() {
        let file = parse_file("preset = \"friedman\"\nmodel = \"M\"\nw0 = 3\n[simulate]\nseed = 5\n").unwrap();
        let o = Overrides { model: Some(SamplingModel::WithReplacement), seed: Some(9), ..Default::default() };
        let e = resolve(file, &o).unwrap();
        assert_eq!(e.model, Some(SamplingModel::WithReplacement));
        assert_eq!((e.w0, e.b0), (Some(3), Some(1)));
        assert_eq!((e.simulate.seed, e.verify.seed), (9, 9));
    }

    #[test]
    fn checkpoint_forms() {
        assert_eq!(parse_checkpoints("dyadic").unwrap(), Checkpoints::Dyadic);
        assert_eq!(parse_checkpoints("1, 10,100").unwrap(), Checkpoints::List(vec![1, 10, 100]));
        assert!(parse_checkpoints("1,x").is_err());
        let e = resolve_text("preset = \"polya\"\n[simulate]\ncheckpoints = [5, 50]\n").unwrap();
        assert_eq!(e.checkpoints, Checkpoints::List(vec![5, 50]));
    }
}
