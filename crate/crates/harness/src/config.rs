//! Experiment configuration: a single JSON document, every field optional.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use setval::operators::ExponentConfig;
use setval::weights::{factorization_exponent, ExponentConvention, FixtureKind};

/// A config problem, anchored to a line of the source document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.column {
            Some(c) => write!(f, "{}:{}:{}: {}", self.path, self.line, c, self.message),
            None => write!(f, "{}:{}: {}", self.path, self.line, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// An exponent that may be infinite; written as a number or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Exponent(x)),
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(Exponent(f64::INFINITY)),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got \"{s}\""))),
        }
    }
}

/// Exponent tuple for the interpolation suites. `p` and `q`, when given,
/// must agree with the values derived from the rest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentInput {
    pub p0: Exponent,
    pub p1: Exponent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<Exponent>,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Exponent>,
}

/// Two weights interpolated with parameter `t` between classes `A_p0` and
/// `A_p1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixturePair {
    pub w0: FixtureKind,
    pub w1: FixtureKind,
    pub p0: f64,
    pub p1: f64,
    pub t: f64,
}

impl FixturePair {
    pub fn id(&self) -> String {
        format!("{}#{}:{}", self.w0.id(), self.t, self.w1.id())
    }

    pub fn dim(&self) -> usize {
        self.w0.dim()
    }
}

/// The fixtures used when a config names none.
pub fn shipped_fixtures() -> Vec<FixturePair> {
    vec![
        FixturePair {
            w0: FixtureKind::Identity { dim: 2 },
            w1: FixtureKind::Identity { dim: 2 },
            p0: 2.0,
            p1: 4.0,
            t: 0.5,
        },
        FixturePair {
            w0: FixtureKind::ScalarPower { exponent: 0.3, center: 0.0 },
            w1: FixtureKind::ScalarPower { exponent: -0.2, center: 0.5 },
            p0: 2.0,
            p1: 3.0,
            t: 0.5,
        },
        FixturePair {
            w0: FixtureKind::RotatedDiagonal { exponents: [0.3, -0.2], turns: 1.0 },
            w1: FixtureKind::RotatedDiagonal { exponents: [-0.2, 0.4], turns: 0.5 },
            p0: 2.0,
            p1: 4.0,
            t: 0.5,
        },
        FixturePair {
            w0: FixtureKind::RotatedDiagonal { exponents: [0.2, 0.0], turns: 0.25 },
            w1: FixtureKind::RandomSpd { dim: 2, seed: 11, amplitude: 0.7, resolution: 3 },
            p0: 3.0,
            p1: 2.0,
            t: 0.25,
        },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    /// Grid level `k` of the random trial fields.
    pub level: u32,
    pub trials: usize,
    pub ns: Vec<usize>,
    pub dims: Vec<usize>,
    pub alphas: Vec<f64>,
    pub ts: Vec<f64>,
    pub exponents: Option<ExponentInput>,
    /// Direction-grid size `M` for grid duals.
    pub grid_size: usize,
    /// Grid sizes of the comparability measurement.
    pub grid_ladder: Vec<usize>,
    pub comparability_pairs: usize,
    pub comparability_directions: usize,
    pub tolerance: f64,
    pub ap_levels: Vec<u32>,
    pub riesz_thorin_levels: Vec<u32>,
    pub riesz_thorin_fields: usize,
    pub fixtures: Vec<FixturePair>,
    pub convention: ExponentConvention,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            seed: 7,
            level: 5,
            trials: 200,
            ns: vec![1, 2],
            dims: vec![1, 2],
            alphas: vec![0.25, 1.0 / 3.0, 0.5],
            ts: vec![0.25, 0.5, 0.75],
            exponents: None,
            grid_size: 720,
            grid_ladder: vec![360, 720, 1440],
            comparability_pairs: 20,
            comparability_directions: 1000,
            tolerance: 1e-9,
            ap_levels: vec![4, 5, 6, 7, 8],
            riesz_thorin_levels: vec![3, 4, 5],
            riesz_thorin_fields: 50,
            fixtures: shipped_fixtures(),
            convention: ExponentConvention::default(),
            out: None,
        }
    }
}

/// Marcinkiewicz exponents resolved for one `(alpha, t)`.
#[derive(Clone, Copy, Debug)]
pub struct ResolvedExponents {
    pub alpha: f64,
    pub exps: ExponentConfig,
}

impl ExperimentConfig {
    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: shown.clone(),
            line: 1,
            column: None,
            message: format!("cannot read config: {e}"),
        })?;
        Self::parse(&text, &shown)
    }

    pub fn parse(text: &str, path: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError {
            path: path.into(),
            line: e.line().max(1),
            column: Some(e.column()),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|(key, message)| ConfigError {
            path: path.into(),
            line: locate(text, key),
            column: None,
            message,
        })?;
        Ok(cfg)
    }

    /// Checks ranges and exponent relations; on failure names the key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.trials == 0 {
            return Err(("trials", "trials must be positive".into()));
        }
        if self.level > 8 {
            return Err(("level", format!("level {} exceeds 8", self.level)));
        }
        if self.ns.is_empty() || self.ns.iter().any(|n| !(1..=2).contains(n)) {
            return Err(("ns", format!("ns must be a nonempty subset of {{1, 2}}, got {:?}", self.ns)));
        }
        if self.dims.is_empty() || self.dims.iter().any(|d| !(1..=3).contains(d)) {
            return Err(("dims", format!("dims must be a nonempty subset of {{1, 2, 3}}, got {:?}", self.dims)));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(("alphas", format!("alphas must lie in (0, 1), got {:?}", self.alphas)));
        }
        if self.ts.is_empty() || self.ts.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return Err(("ts", format!("ts must lie in (0, 1), got {:?}", self.ts)));
        }
        if self.grid_size < 4 {
            return Err(("grid_size", format!("grid_size {} is below 4", self.grid_size)));
        }
        if self.grid_ladder.iter().any(|&m| m < 4) {
            return Err(("grid_ladder", "grid sizes must be at least 4".into()));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(("tolerance", format!("tolerance {} must be finite and nonnegative", self.tolerance)));
        }
        if self.ap_levels.len() < 2 || self.ap_levels.iter().any(|&k| k > 10) {
            return Err(("ap_levels", "ap_levels needs at least two levels, each at most 10".into()));
        }
        if self.riesz_thorin_levels.is_empty() || self.riesz_thorin_levels.iter().any(|&k| k > 8) {
            return Err(("riesz_thorin_levels", "riesz_thorin_levels needs levels at most 8".into()));
        }
        for f in &self.fixtures {
            if f.w0.dim() != f.w1.dim() {
                return Err(("fixtures", format!("fixture {} pairs different dimensions", f.id())));
            }
            let p = factorization_exponent(f.p0, f.p1, f.t, self.convention)
                .map_err(|e| ("fixtures", format!("fixture {}: {e}", f.id())))?;
            for (name, x) in [("p0", f.p0), ("p1", f.p1), ("p", p)] {
                if !(x > 1.0 && x.is_finite()) {
                    return Err(("fixtures", format!("fixture {}: {name} = {x} must lie in (1, inf)", f.id())));
                }
            }
        }
        self.marcinkiewicz_exponents().map_err(|m| ("exponents", m))?;
        Ok(())
    }

    /// Exponent sets of the interpolation suites: every `(alpha, t)` of the
    /// config, or the single explicit tuple, which must be the endpoint pair
    /// `(1/alpha, inf)`, `(1, 1/(1-alpha))` of the fractional maximal operator.
    pub fn marcinkiewicz_exponents(&self) -> Result<Vec<ResolvedExponents>, String> {
        let Some(e) = &self.exponents else {
            let mut out = Vec::new();
            for &alpha in &self.alphas {
                for &t in &self.ts {
                    let exps = ExponentConfig::fractional_maximal(alpha, t).map_err(|e| e.to_string())?;
                    out.push(ResolvedExponents { alpha, exps });
                }
            }
            return Ok(out);
        };
        let (Some(q0), Some(q1)) = (e.q0, e.q1) else {
            return Err("exponents need q0 and q1 for the interpolation suites".into());
        };
        let exps = ExponentConfig::new(e.p0.0, q0.0, e.p1.0, q1.0, e.t, 1.0, 1.0).map_err(|e| e.to_string())?;
        exps.check_supplied(e.p.map(|x| x.0), e.q.map(|x| x.0)).map_err(|e| e.to_string())?;
        let gap = |p: f64, q: f64| 1.0 / p - if q.is_infinite() { 0.0 } else { 1.0 / q };
        let alpha = gap(exps.p0, exps.q0);
        let endpoints = |a: f64| {
            let hi = (1.0 / a, f64::INFINITY);
            let lo = (1.0, 1.0 / (1.0 - a));
            let same = |x: (f64, f64), y: (f64, f64)| {
                (x.0 - y.0).abs() <= 1e-12 * y.0 && (x.1 == y.1 || (x.1 - y.1).abs() <= 1e-12 * y.1)
            };
            let mine = [(exps.p0, exps.q0), (exps.p1, exps.q1)];
            (same(mine[0], hi) && same(mine[1], lo)) || (same(mine[0], lo) && same(mine[1], hi))
        };
        if !(alpha > 0.0 && alpha < 1.0) || !endpoints(alpha) {
            return Err(format!(
                "exponents ({}, {}), ({}, {}) are not the endpoint pair (1/alpha, inf), (1, 1/(1-alpha)) of any alpha in (0, 1)",
                exps.p0, exps.q0, exps.p1, exps.q1
            ));
        }
        Ok(vec![ResolvedExponents { alpha, exps }])
    }
}

/// Line of the first occurrence of `"key"` in `text`, or 1.
fn locate(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        assert!(ExperimentConfig::default().validate().is_ok());
        assert_eq!(ExperimentConfig::default().marcinkiewicz_exponents().unwrap().len(), 9);
    }

    #[test]
    fn errors_point_at_the_key() {
        let text = "{\n  \"seed\": 3,\n  \"alphas\": [1.5]\n}";
        let e = ExperimentConfig::parse(text, "c.json").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.to_string().starts_with("c.json:3: "));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = ExperimentConfig::parse("{\n  \"seed\": ,\n}", "c.json").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.column.is_some());
    }

    #[test]
    fn explicit_exponents_are_checked() {
        let good = r#"{"exponents": {"p0": 2, "q0": "inf", "p1": 1, "q1": 2, "t": 0.5, "p": 1.3333333333333333, "q": 4}}"#;
        let cfg = ExperimentConfig::parse(good, "g").unwrap();
        let r = cfg.marcinkiewicz_exponents().unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].alpha - 0.5).abs() < 1e-15);
        let bad = r#"{"exponents": {"p0": 2, "q0": "inf", "p1": 1, "q1": 2, "t": 0.5, "q": 5}}"#;
        assert!(ExperimentConfig::parse(bad, "b").is_err());
        let wrong_pair = r#"{"exponents": {"p0": 3, "q0": "inf", "p1": 1, "q1": 2, "t": 0.5}}"#;
        assert!(ExperimentConfig::parse(wrong_pair, "w").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::parse("{\"sede\": 1}", "u").is_err());
    }
}
