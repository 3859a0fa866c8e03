//! Side-by-side interval regret of several algorithms on one environment,
//! averaged over seeds.

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{ExpertSet, Interval};
use crate::envsim::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::harness::config::{Algorithm, ExperimentConfig};
use crate::harness::report::headline_bound;
use crate::harness::run::{run, RunRecord};

/// One algorithm's column of a [`Comparison`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonColumn {
    pub algorithm: Algorithm,
    pub seeds: usize,
    /// Mean regret against the realized-best expert of each interval.
    pub mean_regret: Vec<f64>,
    /// Mean of the algorithm's bound for that comparator, where it has one.
    pub mean_bound: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub intervals: Vec<Interval>,
    pub columns: Vec<ComparisonColumn>,
}

impl Comparison {
    pub fn column(&self, algorithm: Algorithm) -> Option<&ComparisonColumn> {
        self.columns.iter().find(|c| c.algorithm == algorithm)
    }
}

/// Checks that two environments differ at most in their seed.
fn same_environment(a: &EnvironmentSpec, b: &EnvironmentSpec) -> Result<()> {
    if a.experts != b.experts || a.horizon != b.horizon {
        return Err(Error::MismatchedEnvironments(format!(
            "{}×{} against {}×{}",
            a.horizon, a.experts, b.horizon, b.experts
        )));
    }
    if a.segments != b.segments {
        return Err(Error::MismatchedEnvironments(
            "segment definitions differ".into(),
        ));
    }
    Ok(())
}

/// The realized-best expert on `interval`, ties to the lowest index.
fn realized_best(prefix: &[Vec<f64>], interval: Interval) -> usize {
    let hi = &prefix[interval.end()];
    let lo = &prefix[interval.start() - 1];
    (0..hi.len())
        .min_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(a.cmp(&b)))
        .expect("at least one expert")
}

fn measure(record: &RunRecord, intervals: &[Interval]) -> Result<(Vec<f64>, Vec<Option<f64>>)> {
    let prefix = record.loss_prefix();
    let mut regret = Vec::with_capacity(intervals.len());
    let mut bound = Vec::with_capacity(intervals.len());
    for &i in intervals {
        if i.end() > record.horizon() {
            return Err(Error::InvalidInterval {
                start: i.start(),
                end: i.end(),
            });
        }
        let best = realized_best(&prefix, i);
        regret.push(record.ledger.regret(best, i)?);
        bound.push(headline_bound(record, i, &ExpertSet::singleton(best))?);
    }
    Ok((regret, bound))
}

/// Tabulates the records per algorithm. The records must share an
/// environment up to the seed; columns follow [`Algorithm::ALL`] order and
/// each average is reduced in record order, so the table is deterministic.
pub fn compare(records: &[RunRecord], intervals: &[Interval]) -> Result<Comparison> {
    let first = records
        .first()
        .ok_or_else(|| Error::MismatchedEnvironments("no records".into()))?;
    for r in &records[1..] {
        same_environment(&first.environment, &r.environment)?;
    }
    let measured: Vec<(Vec<f64>, Vec<Option<f64>>)> = records
        .par_iter()
        .map(|r| measure(r, intervals))
        .collect::<Result<_>>()?;

    let mut columns = Vec::new();
    for algorithm in Algorithm::ALL {
        let picked: Vec<&(Vec<f64>, Vec<Option<f64>>)> = records
            .iter()
            .zip(&measured)
            .filter(|(r, _)| r.algorithm == algorithm)
            .map(|(_, m)| m)
            .collect();
        if picked.is_empty() {
            continue;
        }
        let n = picked.len() as f64;
        let mean_regret = (0..intervals.len())
            .map(|i| picked.iter().map(|m| m.0[i]).sum::<f64>() / n)
            .collect();
        let mean_bound = (0..intervals.len())
            .map(|i| {
                picked
                    .iter()
                    .map(|m| m.1[i])
                    .sum::<Option<f64>>()
                    .map(|s| s / n)
            })
            .collect();
        columns.push(ComparisonColumn {
            algorithm,
            seeds: picked.len(),
            mean_regret,
            mean_bound,
        });
    }
    Ok(Comparison {
        intervals: intervals.to_vec(),
        columns,
    })
}

/// Runs every algorithm on the environment under each seed, in parallel.
/// Records come back ordered by algorithm, then seed.
pub fn run_seeds(
    base: &ExperimentConfig,
    algorithms: &[Algorithm],
    seeds: &[u64],
) -> Result<Vec<RunRecord>> {
    let jobs: Vec<ExperimentConfig> = algorithms
        .iter()
        .flat_map(|&a| {
            seeds.iter().map(move |&s| {
                let mut c = base.clone();
                c.algorithm = a;
                c.environment.seed = s;
                c
            })
        })
        .collect();
    jobs.par_iter().map(run).collect()
}
