//! Verification suites. Each returns a deterministic report; trials run on
//! the current rayon pool.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use setval::set_field::{DyadicDomain, SetField};
use setval::Result;

use crate::config::ExperimentConfig;
use crate::report::{FailureArtifact, SuiteOutput, TrialRecord};
use crate::trials::{trial_field, trial_rng, TrialKind};

pub mod endpoints;
pub mod marcinkiewicz;
pub mod reverse_factorization;
pub mod riesz_thorin;
pub mod selftest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Marcinkiewicz,
    Endpoints,
    RieszThorin,
    ReverseFactorization,
    BodiesSelftest,
}

impl Suite {
    /// The suites of `all`.
    pub const EXPERIMENTS: [Suite; 4] =
        [Suite::Marcinkiewicz, Suite::Endpoints, Suite::RieszThorin, Suite::ReverseFactorization];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Marcinkiewicz => "marcinkiewicz",
            Suite::Endpoints => "endpoints",
            Suite::RieszThorin => "riesz-thorin",
            Suite::ReverseFactorization => "reverse-factorization",
            Suite::BodiesSelftest => "bodies-selftest",
        }
    }

    /// Stream tag of the suite's random draws.
    fn stream(self) -> u64 {
        match self {
            Suite::Marcinkiewicz => 1,
            Suite::Endpoints => 2,
            Suite::RieszThorin => 3,
            Suite::ReverseFactorization => 4,
            Suite::BodiesSelftest => 5,
        }
    }

    pub fn run(self, config: &ExperimentConfig) -> Result<SuiteOutput> {
        match self {
            Suite::Marcinkiewicz => marcinkiewicz::run(config),
            Suite::Endpoints => endpoints::run(config),
            Suite::RieszThorin => riesz_thorin::run(config),
            Suite::ReverseFactorization => reverse_factorization::run(config),
            Suite::BodiesSelftest => selftest::run(config),
        }
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [
            Suite::Marcinkiewicz,
            Suite::Endpoints,
            Suite::RieszThorin,
            Suite::ReverseFactorization,
            Suite::BodiesSelftest,
        ]
        .into_iter()
        .find(|x| x.name() == s)
        .ok_or_else(|| format!("unknown suite {s}"))
    }
}

/// Shape of random trial `index`: kinds cycle 2:1:1, then `(n, d)` over
/// `ns x dims`, then the alpha slot.
#[derive(Clone, Copy, Debug)]
pub struct TrialSpec {
    pub index: usize,
    pub kind: TrialKind,
    pub n: usize,
    pub d: usize,
    pub slot: usize,
}

impl TrialSpec {
    pub fn new(config: &ExperimentConfig, index: usize) -> Self {
        let combos: Vec<(usize, usize)> =
            config.ns.iter().flat_map(|&n| config.dims.iter().map(move |&d| (n, d))).collect();
        let (n, d) = combos[(index / 4) % combos.len()];
        Self { index, kind: TrialKind::for_trial(index), n, d, slot: index / (4 * combos.len()) }
    }

    pub fn label(&self) -> String {
        format!("n={} d={} {:?}", self.n, self.d, self.kind).to_lowercase()
    }

    pub fn field(&self, config: &ExperimentConfig, suite: Suite) -> Result<SetField> {
        let domain = DyadicDomain::new(self.n, config.level)?;
        trial_field(self.kind, domain, self.d, &mut trial_rng(config.seed, suite.stream(), self.index))
    }

    pub fn record(&self) -> TrialRecord {
        TrialRecord {
            index: self.index,
            kind: Some(self.kind),
            label: self.label(),
            values: Default::default(),
            passed: true,
        }
    }
}

/// `num / den`, with `0/0 = 0`; a positive numerator over zero is reported
/// as `f64::MAX` so that it stays representable in JSON.
pub fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::MAX
    } else {
        0.0
    }
}

/// Compact decimal for report keys.
pub fn short(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

pub(crate) fn failure(suite: Suite, config: &ExperimentConfig, trial: &TrialRecord, field: Option<SetField>) -> FailureArtifact {
    let mut config = config.clone();
    config.out = None;
    FailureArtifact { suite: suite.name().to_string(), trial: trial.clone(), field, config }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::EXPERIMENTS.into_iter().chain([Suite::BodiesSelftest]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
    }

    #[test]
    fn trial_specs_cycle() {
        let cfg = ExperimentConfig::default();
        let s = TrialSpec::new(&cfg, 5);
        assert_eq!((s.kind, s.n, s.d, s.slot), (TrialKind::Spike, 1, 2, 0));
        let s = TrialSpec::new(&cfg, 17);
        assert_eq!((s.n, s.d, s.slot), (1, 1, 1));
        assert_eq!(short(1.0 / 3.0), "0.3333");
        assert_eq!(short(0.5), "0.5");
    }
}
