use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{ExpertPrior, ExpertSet, ProbabilityVector};
use crate::envsim::EnvironmentSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "hedge")]
    Hedge,
    #[serde(rename = "squint")]
    Squint,
    #[serde(rename = "cbce+hedge")]
    CbceHedge,
    #[serde(rename = "cbce+squint")]
    CbceSquint,
    #[serde(rename = "squint-ce-uniform")]
    SquintCeUniform,
    #[serde(rename = "squint-ce-jun")]
    SquintCeJun,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Hedge,
        Algorithm::Squint,
        Algorithm::CbceHedge,
        Algorithm::CbceSquint,
        Algorithm::SquintCeUniform,
        Algorithm::SquintCeJun,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hedge => "hedge",
            Algorithm::Squint => "squint",
            Algorithm::CbceHedge => "cbce+hedge",
            Algorithm::CbceSquint => "cbce+squint",
            Algorithm::SquintCeUniform => "squint-ce-uniform",
            Algorithm::SquintCeJun => "squint-ce-jun",
        }
    }

    pub fn is_squint_ce(self) -> bool {
        matches!(self, Algorithm::SquintCeUniform | Algorithm::SquintCeJun)
    }

    pub fn is_cbce(self) -> bool {
        matches!(self, Algorithm::CbceHedge | Algorithm::CbceSquint)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown algorithm `{s}`")))
    }
}

/// Which intervals the bound checks cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum IntervalPolicy {
    /// Exhaustive up to `T = 128`, otherwise dyadic plus 200 sampled.
    #[default]
    Auto,
    Exhaustive,
    /// Every covering interval inside `[1, T]` plus `[1, T]` itself.
    Dyadic,
    /// `[1, T]` plus `n` intervals drawn at random.
    Sampled(usize),
    /// Dyadic plus `n` sampled.
    DyadicSampled(usize),
}

/// Horizon up to which [`IntervalPolicy::Auto`] is exhaustive.
pub const EXHAUSTIVE_LIMIT: usize = 128;
/// Sample size [`IntervalPolicy::Auto`] uses above that.
pub const AUTO_SAMPLES: usize = 200;

impl IntervalPolicy {
    /// Resolves `Auto` for a horizon.
    pub fn resolve(self, horizon: usize) -> IntervalPolicy {
        match self {
            IntervalPolicy::Auto if horizon <= EXHAUSTIVE_LIMIT => IntervalPolicy::Exhaustive,
            IntervalPolicy::Auto => IntervalPolicy::DyadicSampled(AUTO_SAMPLES),
            other => other,
        }
    }
}

impl fmt::Display for IntervalPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalPolicy::Auto => f.write_str("auto"),
            IntervalPolicy::Exhaustive => f.write_str("exhaustive"),
            IntervalPolicy::Dyadic => f.write_str("dyadic"),
            IntervalPolicy::Sampled(n) => write!(f, "sampled:{n}"),
            IntervalPolicy::DyadicSampled(n) => write!(f, "dyadic+sampled:{n}"),
        }
    }
}

impl FromStr for IntervalPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let count = |n: &str| {
            n.parse::<usize>()
                .map_err(|_| Error::InvalidSpec(format!("bad sample count in `{s}`")))
        };
        match s {
            "auto" => Ok(IntervalPolicy::Auto),
            "exhaustive" => Ok(IntervalPolicy::Exhaustive),
            "dyadic" => Ok(IntervalPolicy::Dyadic),
            _ => {
                if let Some(n) = s.strip_prefix("dyadic+sampled:") {
                    Ok(IntervalPolicy::DyadicSampled(count(n)?))
                } else if let Some(n) = s.strip_prefix("sampled:") {
                    Ok(IntervalPolicy::Sampled(count(n)?))
                } else {
                    Err(Error::InvalidSpec(format!("unknown interval policy `{s}`")))
                }
            }
        }
    }
}

impl TryFrom<String> for IntervalPolicy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<IntervalPolicy> for String {
    fn from(p: IntervalPolicy) -> String {
        p.to_string()
    }
}

/// Comparator families for the bound checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComparatorPolicy {
    /// Each expert alone.
    pub singletons: bool,
    /// The expert with the least loss on each interval.
    pub realized_best: bool,
    /// The `⌈K/2⌉` experts with the least loss on each interval.
    pub top_half: bool,
    /// Extra fixed sets, 1-based.
    pub sets: Vec<Vec<usize>>,
}

impl Default for ComparatorPolicy {
    fn default() -> Self {
        Self {
            singletons: true,
            realized_best: true,
            top_half: true,
            sets: Vec::new(),
        }
    }
}

fn default_ew_rate() -> f64 {
    1.0
}

/// One experiment: an environment plus the learner run on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    #[serde(flatten)]
    pub environment: EnvironmentSpec,
    /// `π`; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    /// Hedge rate; tuned for `T` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hedge_rate: Option<f64>,
    /// `η_EW` for Squint and Squint-CE.
    #[serde(default = "default_ew_rate")]
    pub ew_rate: f64,
    #[serde(default)]
    pub comparators: ComparatorPolicy,
    #[serde(default)]
    pub intervals: IntervalPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, environment: EnvironmentSpec) -> Self {
        Self {
            algorithm,
            environment,
            prior: None,
            hedge_rate: None,
            ew_rate: 1.0,
            comparators: ComparatorPolicy::default(),
            intervals: IntervalPolicy::Auto,
            output: None,
        }
    }

    pub fn horizon(&self) -> usize {
        self.environment.horizon
    }

    pub fn experts(&self) -> usize {
        self.environment.experts
    }

    pub fn expert_prior(&self) -> Result<ExpertPrior> {
        match &self.prior {
            None => ExpertPrior::uniform(self.experts()),
            Some(p) => {
                if p.len() != self.experts() {
                    return Err(Error::DimensionMismatch {
                        expected: self.experts(),
                        found: p.len(),
                    });
                }
                Ok(ExpertPrior::new(ProbabilityVector::new(p.clone())?))
            }
        }
    }

    /// The fixed comparator sets, converted to 0-based.
    pub fn fixed_sets(&self) -> Result<Vec<ExpertSet>> {
        self.comparators
            .sets
            .iter()
            .map(|s| {
                let members = s
                    .iter()
                    .map(|&k| {
                        k.checked_sub(1).ok_or(Error::ExpertOutOfRange {
                            index: k,
                            experts: self.experts(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                ExpertSet::new(members, self.experts())
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.environment.validate()?;
        self.expert_prior()?;
        self.fixed_sets()?;
        if !self.ew_rate.is_finite() || self.ew_rate < 0.0 {
            return Err(Error::InvalidRate(format!("EW rate {}", self.ew_rate)));
        }
        if let Some(r) = self.hedge_rate {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::InvalidRate(format!("Hedge rate {r}")));
            }
        }
        Ok(())
    }
}

/// Parses a JSON config; syntax and schema errors carry line and column.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

pub fn write_config(config: &ExperimentConfig, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(config).map_err(|e| Error::Config {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
