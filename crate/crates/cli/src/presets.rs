//! Named urns from the literature, optionally parametrised as `name m=3 c=2`.

use multidraw::{ReplacementMatrix, SamplingModel};

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub matrix: ReplacementMatrix,
    pub model: SamplingModel,
    pub w0: i64,
    pub b0: i64,
}

pub const NAMES: [&str; 7] = ["friedman", "polya", "logic-circuit", "degenerate", "m2-condition", "critical", "large-index"];

/// Parses `name [m=<int>] [c=<int>]`; separators may be spaces or commas.
pub fn expand(spec: &str) -> Result<Preset, String> {
    let mut parts = spec.split(|ch: char| ch.is_whitespace() || ch == ',' || ch == ':').filter(|s| !s.is_empty());
    let name = parts.next().ok_or("empty preset name")?.to_ascii_lowercase();
    let (mut m, mut c) = (None, None);
    for part in parts {
        let (key, value) = part.split_once('=').ok_or_else(|| format!("preset parameter '{part}' is not key=value"))?;
        let value: i64 = value.parse().map_err(|_| format!("preset parameter '{key}' needs an integer, got '{value}'"))?;
        match key {
            "m" => m = Some(value),
            "c" => c = Some(value),
            other => return Err(format!("unknown preset parameter '{other}' (expected m or c)")),
        }
    }
    let m = m.unwrap_or(2);
    let c = c.unwrap_or(1);
    if !(1..=64).contains(&m) {
        return Err(format!("preset sample size m = {m} is out of range"));
    }
    if c < 1 {
        return Err(format!("preset parameter c = {c} must be positive"));
    }
    let mu = m as usize;
    // smallest symmetric start with T0 >= m
    let half = (m + 1) / 2;
    let fixed_only = |what: &str| -> Result<(), String> {
        if spec.contains('=') {
            Err(format!("preset '{what}' takes no parameters"))
        } else {
            Ok(())
        }
    };
    let (name, a, sigma, model, w0, b0): (&'static str, Vec<i64>, i64, SamplingModel, i64, i64) = match name.as_str() {
        "friedman" => ("friedman", (0..=m).map(|k| k * c).collect(), m * c, SamplingModel::WithoutReplacement, half, half),
        "polya" => ("polya", (0..=m).map(|k| (m - k) * c).collect(), m * c, SamplingModel::WithoutReplacement, half, half),
        "logic-circuit" => ("logic-circuit", (0..=m).map(|k| 1 - (m - k)).collect(), 1, SamplingModel::WithoutReplacement, m, m),
        "degenerate" => ("degenerate", vec![c; mu + 1], 2 * c, SamplingModel::WithReplacement, m, m),
        "m2-condition" => {
            fixed_only("m2-condition")?;
            ("m2-condition", vec![1, 2, 3], 4, SamplingModel::WithoutReplacement, 2, 2)
        }
        "critical" => {
            fixed_only("critical")?;
            ("critical", vec![3, 2, 1], 4, SamplingModel::WithReplacement, 2, 2)
        }
        "large-index" => {
            fixed_only("large-index")?;
            ("large-index", vec![7, 5, 3, 1], 8, SamplingModel::WithReplacement, 4, 4)
        }
        other => return Err(format!("unknown preset '{other}' (known: {})", NAMES.join(", "))),
    };
    let matrix = ReplacementMatrix::new(a, sigma).map_err(|e| e.to_string())?;
    Ok(Preset { name, matrix, model, w0, b0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use multidraw::{check_affinity, identify_family, validate_tenability, Family};

    #[test]
    fn every_preset_is_affine_and_tenable() {
        for name in NAMES {
            let p = expand(name).unwrap();
            assert!(check_affinity(&p.matrix).params().is_some(), "{name}");
            assert!(validate_tenability(&p.matrix, p.model).is_tenable(), "{name}");
        }
    }

    #[test]
    fn families_are_recognised() {
        let f = |s: &str| identify_family(&expand(s).unwrap().matrix);
        assert_eq!(f("friedman m=3 c=2"), Some(Family::GeneralizedFriedman { c: 2 }));
        assert_eq!(f("polya"), Some(Family::GeneralizedPolya { c: 1 }));
        assert_eq!(f("logic-circuit m=3"), Some(Family::LogicCircuit));
        assert_eq!(f("degenerate"), Some(Family::Degenerate { c: 1 }));
    }

    #[test]
    fn bad_specs() {
        assert!(expand("nope").is_err());
        assert!(expand("friedman k=2").is_err());
        assert!(expand("critical m=3").is_err());
        assert!(expand("polya c=0").is_err());
    }

    #[test]
    fn start_covers_the_sample() {
        for m in 1..=6 {
            let p = expand(&format!("friedman m={m}")).unwrap();
            assert!(p.w0 + p.b0 >= m);
            assert_eq!(p.w0, p.b0);
        }
        assert_eq!(expand("polya").unwrap().w0, 1);
    }
}
