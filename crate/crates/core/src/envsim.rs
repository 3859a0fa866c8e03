//! Seedable loss sequences for stationary and changing environments.
//!
//! An [`EnvironmentSpec`] splits `[1, T]` into segments, each with its own
//! generator. Coin losses are Bernoulli draws; the uniform behind cell
//! `(t, k)` comes from ChaCha8 seeded with `seed`, stream `t`, word position
//! `2k`, so any cell can be regenerated on its own.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::LossVector;
use crate::error::{Error, Result};

/// Loss generator for one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    /// The same loss vector every round.
    Constant { losses: Vec<f64> },
    /// Independent Bernoulli losses with per-expert means.
    Coin { means: Vec<f64> },
    /// Bernoulli losses whose means move linearly from `from` (first round of
    /// the segment) to `to` (one round past its end).
    Ramp { from: Vec<f64>, to: Vec<f64> },
    /// Explicit rows, one per round of the segment.
    Table { rows: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// First round, 1-based.
    pub start: usize,
    pub generator: Generator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub experts: usize,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    pub segments: Vec<Segment>,
}

/// `T × K` losses, row `t − 1` holding round `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossMatrix {
    experts: usize,
    rows: Vec<LossVector>,
}

impl LossMatrix {
    pub fn new(experts: usize, rows: Vec<LossVector>) -> Result<Self> {
        if experts < 1 {
            return Err(Error::EmptySupport);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != experts) {
            return Err(Error::DimensionMismatch {
                expected: experts,
                found: bad.len(),
            });
        }
        Ok(Self { experts, rows })
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    pub fn horizon(&self) -> usize {
        self.rows.len()
    }

    /// Losses of round `t` (1-based).
    pub fn round(&self, t: usize) -> &LossVector {
        &self.rows[t - 1]
    }

    pub fn rows(&self) -> &[LossVector] {
        &self.rows
    }
}

fn check_unit(values: &[f64], experts: usize, what: &str) -> Result<()> {
    if values.len() != experts {
        return Err(Error::InvalidSpec(format!(
            "{what} has {} entries for {experts} experts",
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidSpec(format!(
            "{what} value {v} outside [0, 1]"
        )));
    }
    Ok(())
}

impl EnvironmentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.experts < 1 {
            return Err(Error::InvalidSpec("need at least one expert".into()));
        }
        if self.horizon < 1 {
            return Err(Error::InvalidHorizon(self.horizon));
        }
        let first = self
            .segments
            .first()
            .ok_or_else(|| Error::InvalidSpec("no segments".into()))?;
        if first.start != 1 {
            return Err(Error::InvalidSpec(format!(
                "first segment starts at {}, expected 1",
                first.start
            )));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            let end = self.segment_end(i);
            if seg.start > self.horizon || end < seg.start {
                return Err(Error::InvalidSpec(format!(
                    "segment {} starts at {} (horizon {}, next start {})",
                    i + 1,
                    seg.start,
                    self.horizon,
                    end + 1
                )));
            }
            let k = self.experts;
            match &seg.generator {
                Generator::Constant { losses } => check_unit(losses, k, "constant losses")?,
                Generator::Coin { means } => check_unit(means, k, "coin means")?,
                Generator::Ramp { from, to } => {
                    check_unit(from, k, "ramp start")?;
                    check_unit(to, k, "ramp end")?;
                }
                Generator::Table { rows } => {
                    let len = end - seg.start + 1;
                    if rows.len() != len {
                        return Err(Error::InvalidSpec(format!(
                            "table for segment {} has {} rows, segment has {len} rounds",
                            i + 1,
                            rows.len()
                        )));
                    }
                    for row in rows {
                        check_unit(row, k, "table row")?;
                    }
                }
            }
        }
        Ok(())
    }

    fn segment_end(&self, i: usize) -> usize {
        match self.segments.get(i + 1) {
            Some(next) => next.start.saturating_sub(1),
            None => self.horizon,
        }
    }

    /// Segment index holding round `t`.
    fn segment_of(&self, t: usize) -> usize {
        self.segments.partition_point(|s| s.start <= t) - 1
    }

    /// First rounds of every segment after the first.
    pub fn boundaries(&self) -> Vec<usize> {
        self.segments.iter().skip(1).map(|s| s.start).collect()
    }
}

/// The uniform in `[0, 1)` behind cell `(t, k)`.
pub fn cell_uniform(seed: u64, t: usize, k: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng.set_word_pos(2 * k as u128);
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn coin(seed: u64, t: usize, k: usize, mean: f64) -> f64 {
    if cell_uniform(seed, t, k) < mean {
        1.0
    } else {
        0.0
    }
}

fn row(spec: &EnvironmentSpec, t: usize) -> Result<LossVector> {
    let i = spec.segment_of(t);
    let seg = &spec.segments[i];
    let values = match &seg.generator {
        Generator::Constant { losses } => losses.clone(),
        Generator::Coin { means } => means
            .iter()
            .enumerate()
            .map(|(k, &m)| coin(spec.seed, t, k, m))
            .collect(),
        Generator::Ramp { from, to } => {
            let len = (spec.segment_end(i) - seg.start + 1) as f64;
            let s = (t - seg.start) as f64 / len;
            from.iter()
                .zip(to)
                .enumerate()
                .map(|(k, (a, b))| coin(spec.seed, t, k, a + s * (b - a)))
                .collect()
        }
        Generator::Table { rows } => rows[t - seg.start].clone(),
    };
    LossVector::new(values)
}

/// Materializes the losses. A pure function of `spec`.
pub fn generate(spec: &EnvironmentSpec) -> Result<LossMatrix> {
    spec.validate()?;
    let rows = (1..=spec.horizon)
        .into_par_iter()
        .map(|t| row(spec, t))
        .collect::<Result<Vec<_>>>()?;
    LossMatrix::new(spec.experts, rows)
}

/// Names accepted by [`scenario`].
pub const SCENARIOS: [&str; 4] = ["stationary", "single-switch", "two-switch", "drift"];

/// Means with expert `best` at 0.1 and the rest spread over `[0.5, 0.9]`.
fn ranked_means(experts: usize, best: usize) -> Vec<f64> {
    if experts == 1 {
        return vec![0.5];
    }
    let others = experts - 1;
    let mut means = vec![0.0; experts];
    let mut rank = 0;
    for (k, m) in means.iter_mut().enumerate() {
        if k == best {
            *m = 0.1;
        } else {
            *m = if others == 1 {
                0.9
            } else {
                0.5 + 0.4 * rank as f64 / (others - 1) as f64
            };
            rank += 1;
        }
    }
    means
}

/// Built-in presets:
///
/// * `stationary`: one coin segment, expert 1 best (mean 0.1), the others
///   spread over `[0.5, 0.9]`.
/// * `single-switch`: the same until `⌊T/2⌋`, then expert K best from
///   `⌊T/2⌋ + 1` with the other means reversed.
/// * `two-switch`: best expert 1, then 2, then 1 again, switching at
///   `⌊T/3⌋ + 1` and `⌊2T/3⌋ + 1`.
/// * `drift`: segments every `⌊T/8⌋` rounds; inside segment `i` the means ramp
///   from the profile with expert `i mod K` best to the one with `i + 1`.
pub fn scenario(name: &str, experts: usize, horizon: usize, seed: u64) -> Result<EnvironmentSpec> {
    if experts < 1 {
        return Err(Error::InvalidSpec("need at least one expert".into()));
    }
    if horizon < 1 {
        return Err(Error::InvalidHorizon(horizon));
    }
    let coin = |best: usize| Generator::Coin {
        means: ranked_means(experts, best % experts),
    };
    let at = |start: usize, generator| Segment { start, generator };
    let mut segments = match name {
        "stationary" => vec![at(1, coin(0))],
        "single-switch" => {
            let mut late = ranked_means(experts, 0);
            late.reverse();
            vec![
                at(1, coin(0)),
                at(horizon / 2 + 1, Generator::Coin { means: late }),
            ]
        }
        "two-switch" => vec![
            at(1, coin(0)),
            at(horizon / 3 + 1, coin(1)),
            at(2 * horizon / 3 + 1, coin(0)),
        ],
        "drift" => {
            let step = (horizon / 8).max(1);
            (0..8)
                .map(|i| (i, 1 + i * step))
                .filter(|&(_, s)| s <= horizon)
                .map(|(i, s)| {
                    at(
                        s,
                        Generator::Ramp {
                            from: ranked_means(experts, i % experts),
                            to: ranked_means(experts, (i + 1) % experts),
                        },
                    )
                })
                .collect()
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    // Short horizons can collapse boundaries onto each other or past T.
    segments.dedup_by(|b, a| b.start <= a.start);
    segments.retain(|s| s.start <= horizon);
    let spec = EnvironmentSpec {
        experts,
        horizon,
        seed,
        segments,
    };
    spec.validate()?;
    Ok(spec)
}

/// Every preset for the given size.
pub fn builtin_scenarios(
    experts: usize,
    horizon: usize,
    seed: u64,
) -> Result<Vec<(&'static str, EnvironmentSpec)>> {
    SCENARIOS
        .iter()
        .map(|&n| Ok((n, scenario(n, experts, horizon, seed)?)))
        .collect()
}
