//! Invariant suites: structural facts about the covering, and per-run
//! consistency plus bound and surrogate checks.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::covering::{
    active_intervals, floor_log2, partition, partition_count_bound, BoxScope, CoveringInterval,
    CoveringSchedule,
};
use crate::domain::Interval;
use crate::envsim::scenario;
use crate::error::Result;
use crate::harness::config::{Algorithm, ExperimentConfig};
use crate::harness::report::{evaluate_bounds, evaluate_surrogates, BoundReport, SurrogateReport};
use crate::harness::run::{run, RunRecord};
use crate::meta::JunPrior;

/// How many failure descriptions a check keeps.
const KEPT_FAILURES: usize = 8;

/// Outcome of one structural check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralCheck {
    pub name: &'static str,
    pub cases: u64,
    pub failed: u64,
    /// The first few failures.
    pub examples: Vec<String>,
}

impl StructuralCheck {
    fn collect(name: &'static str, results: Vec<std::result::Result<(), String>>) -> Self {
        let cases = results.len() as u64;
        let failures: Vec<String> = results.into_iter().filter_map(|r| r.err()).collect();
        Self {
            name,
            cases,
            failed: failures.len() as u64,
            examples: failures.into_iter().take(KEPT_FAILURES).collect(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

/// Sizes for [`structural_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuralLimits {
    /// Every `I ⊆ [1, partition_horizon]` is partitioned.
    pub partition_horizon: usize,
    /// Active sets are counted for every `t ≤ active_limit`.
    pub active_limit: usize,
    /// `|B|` is checked at powers of two ± 1 up to this.
    pub box_limit: usize,
    /// Horizon of the box-update counting run.
    pub update_horizon: usize,
}

impl Default for StructuralLimits {
    fn default() -> Self {
        Self {
            partition_horizon: 512,
            active_limit: 1 << 16,
            box_limit: 1 << 16,
            update_horizon: 1024,
        }
    }
}

fn check_partition(i: Interval) -> std::result::Result<(), String> {
    let p = partition(i);
    let pieces = p.pieces();
    let fail = |what: &str| Err(format!("{i}: {what}"));
    if pieces.is_empty() {
        return fail("no pieces");
    }
    if pieces[0].start() != i.start() || pieces[pieces.len() - 1].end() != i.end() {
        return fail("pieces do not cover the interval");
    }
    for w in pieces.windows(2) {
        if w[1].start() != w[0].end() + 1 {
            return fail("pieces are not consecutive");
        }
    }
    for j in pieces {
        match CoveringInterval::from_bounds(j.start(), j.end()) {
            Some(r) if r.level() == j.level() && r.index() == j.index() => {}
            _ => return fail("piece is not a covering interval"),
        }
    }
    let c = p.c();
    for k in 0..c {
        if 2 * pieces[k].len() > pieces[k + 1].len() {
            return fail("lengths before the peak do not double");
        }
    }
    // No ratio is imposed between J^(0) and J^(1).
    for k in (c + 1)..pieces.len().saturating_sub(1) {
        if 2 * pieces[k + 1].len() > pieces[k].len() {
            return fail("lengths after the peak do not halve");
        }
    }
    if p.c() + p.d() + 1 != pieces.len() {
        return fail("c + d + 1 differs from the piece count");
    }
    if pieces.len() as f64 > partition_count_bound(i) {
        return fail("more pieces than 2 log2(|I| + 2)");
    }
    Ok(())
}

fn partition_check(horizon: usize) -> StructuralCheck {
    let results: Vec<_> = (1..=horizon)
        .into_par_iter()
        .flat_map_iter(|a| {
            (a..=horizon).map(move |b| check_partition(Interval::new(a, b).expect("a ≤ b")))
        })
        .collect();
    StructuralCheck::collect("partition", results)
}

fn active_check(limit: usize) -> StructuralCheck {
    let results: Vec<_> = (1..=limit)
        .into_par_iter()
        .map(|t| {
            let active = active_intervals(t).map_err(|e| e.to_string())?;
            let want = 1 + floor_log2(t) as usize;
            if active.len() != want {
                return Err(format!("t={t}: {} active, want {want}", active.len()));
            }
            if !active.iter().all(|j| j.contains(t)) {
                return Err(format!("t={t}: an active interval misses t"));
            }
            Ok(())
        })
        .collect();
    StructuralCheck::collect("active-count", results)
}

/// Powers of two and their neighbours up to `limit`.
pub fn probe_horizons(limit: usize) -> Vec<usize> {
    let mut out = vec![1];
    let mut p = 2usize;
    while p <= limit {
        out.extend([p - 1, p, p + 1].into_iter().filter(|&t| t <= limit));
        p *= 2;
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn box_count_check(limit: usize) -> (StructuralCheck, StructuralCheck) {
    let horizons = probe_horizons(limit);
    let schedules: Vec<(usize, Result<CoveringSchedule>)> = horizons
        .par_iter()
        .map(|&t| (t, CoveringSchedule::enumerate_boxes(t)))
        .collect();
    let mut counts = Vec::new();
    let mut jun = Vec::new();
    for (t, s) in schedules {
        let s = match s {
            Ok(s) => s,
            Err(e) => {
                counts.push(Err(format!("T={t}: {e}")));
                continue;
            }
        };
        // Level n holds ⌊(T+1)/2^n⌋ − 1 intervals ending by T.
        let formula: usize = (0..=floor_log2(t))
            .map(|n| ((t + 1) >> n).saturating_sub(1))
            .sum();
        counts.push(if s.len() > 2 * t {
            Err(format!("T={t}: |B| = {} > 2T", s.len()))
        } else if s.len() != formula {
            Err(format!(
                "T={t}: |B| = {} but level count gives {formula}",
                s.len()
            ))
        } else {
            Ok(())
        });
        for scope in [BoxScope::EndWithinHorizon, BoxScope::StartWithinHorizon] {
            let z = CoveringSchedule::with_scope(t, scope)
                .and_then(|s| JunPrior::new(&s))
                .map(|j| j.normalizer());
            jun.push(match z {
                Ok(z) if z <= PI * PI / 6.0 + 1e-9 => Ok(()),
                Ok(z) => Err(format!("T={t}: Z = {z} > π²/6")),
                Err(e) => Err(format!("T={t}: {e}")),
            });
        }
    }
    (
        StructuralCheck::collect("box-count", counts),
        StructuralCheck::collect("jun-normalizer", jun),
    )
}

fn update_check(horizon: usize) -> StructuralCheck {
    let expected: u64 = (1..=horizon as u64).map(|t| 1 + t.ilog2() as u64).sum();
    let mut results = Vec::new();
    for base in [Algorithm::CbceHedge, Algorithm::CbceSquint] {
        let env = scenario("stationary", 2, horizon, 0);
        let outcome = env.and_then(|e| run(&ExperimentConfig::new(base, e)));
        results.push(match outcome {
            Ok(r) if r.box_updates == expected => Ok(()),
            Ok(r) => Err(format!(
                "{base}: {} box updates, want {expected}",
                r.box_updates
            )),
            Err(e) => Err(format!("{base}: {e}")),
        });
    }
    let schedule = CoveringSchedule::with_scope(horizon, BoxScope::StartWithinHorizon);
    match schedule {
        Ok(s) => {
            let total: Result<u64> = (1..=horizon)
                .map(|t| s.active(t).map(|a| a.len() as u64))
                .sum();
            results.push(match total {
                Ok(n) if n == expected => Ok(()),
                Ok(n) => Err(format!("schedule active sets sum to {n}, want {expected}")),
                Err(e) => Err(e.to_string()),
            });
        }
        Err(e) => results.push(Err(e.to_string())),
    }
    StructuralCheck::collect("box-updates", results)
}

/// Covering invariants: partitions, active-set sizes, `|B| ≤ 2T`, the Jun
/// normalizer and the box-update event count.
pub fn structural_suite(limits: StructuralLimits) -> Vec<StructuralCheck> {
    let (counts, jun) = box_count_check(limits.box_limit);
    vec![
        partition_check(limits.partition_horizon),
        active_check(limits.active_limit),
        counts,
        jun,
        update_check(limits.update_horizon),
    ]
}

/// Everything checked for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunVerification {
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Trace consistency problems (row count, normalization, ledger).
    pub trace_problems: Vec<String>,
    pub bounds: BoundReport,
    pub surrogates: SurrogateReport,
}

impl RunVerification {
    pub fn is_clean(&self) -> bool {
        self.trace_problems.is_empty() && self.bounds.is_clean() && self.surrogates.is_clean()
    }
}

fn trace_problems(record: &RunRecord) -> Vec<String> {
    let mut problems = Vec::new();
    let horizon = record.environment.horizon;
    if record.rows.len() != horizon {
        problems.push(format!("{} rows for T = {horizon}", record.rows.len()));
    }
    if record.ledger.rounds() != record.rows.len() {
        problems.push(format!(
            "ledger has {} rounds, trace has {}",
            record.ledger.rounds(),
            record.rows.len()
        ));
        return problems;
    }
    for row in &record.rows {
        let total: f64 = row.weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 || row.weights.iter().any(|w| *w < 0.0) {
            problems.push(format!("t={}: weights sum to {total}", row.t));
        }
        let loss: f64 = row
            .weights
            .iter()
            .zip(&row.losses)
            .map(|(w, l)| w * l)
            .sum();
        for (k, (&r, &l)) in row.regret.iter().zip(&row.losses).enumerate() {
            if (r - (loss - l)).abs() > 1e-12 {
                problems.push(format!("t={}: r_{} is not w·l − l_{}", row.t, k + 1, k + 1));
            }
            match record.ledger.round_regret(row.t, k) {
                Ok(x) if (x - r).abs() <= 1e-9 => {}
                _ => problems.push(format!("t={}: ledger disagrees with the trace", row.t)),
            }
        }
        if problems.len() >= KEPT_FAILURES {
            break;
        }
    }
    if record.algorithm.is_cbce() {
        let expected: u64 = (1..=horizon as u64).map(|t| 1 + t.ilog2() as u64).sum();
        if record.box_updates != expected {
            problems.push(format!(
                "{} box updates, want {expected}",
                record.box_updates
            ));
        }
    }
    problems
}

/// Runs the trace, bound and surrogate checks on a finished run.
pub fn verify_run(record: &RunRecord, config: &ExperimentConfig) -> Result<RunVerification> {
    Ok(RunVerification {
        algorithm: record.algorithm,
        seed: record.environment.seed,
        trace_problems: trace_problems(record),
        bounds: evaluate_bounds(record, config)?,
        surrogates: evaluate_surrogates(record, config)?,
    })
}

/// Runs and verifies the configuration under each seed, in parallel.
pub fn verify_seeds(config: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<RunVerification>> {
    seeds
        .par_iter()
        .map(|&s| {
            let mut c = config.clone();
            c.environment.seed = s;
            let record = run(&c)?;
            verify_run(&record, &c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_structural_suite_passes() {
        let checks = structural_suite(StructuralLimits {
            partition_horizon: 64,
            active_limit: 4096,
            box_limit: 4096,
            update_horizon: 100,
        });
        assert_eq!(checks.len(), 5);
        for c in &checks {
            assert!(c.passed(), "{c:?}");
            assert!(c.cases > 0);
        }
        assert_eq!(checks[0].cases, 64 * 65 / 2);
    }

    #[test]
    fn probes_are_powers_of_two_neighbours() {
        assert_eq!(probe_horizons(9), vec![1, 2, 3, 4, 5, 7, 8, 9]);
    }

    #[test]
    fn partition_check_catches_examples() {
        assert!(check_partition(Interval::new(1, 30).unwrap()).is_ok());
        assert!(check_partition(Interval::new(5, 5).unwrap()).is_ok());
    }

    #[test]
    fn verified_runs_are_clean() {
        for a in Algorithm::ALL {
            let c = ExperimentConfig::new(a, scenario("two-switch", 3, 48, 0).unwrap());
            for v in verify_seeds(&c, &[1, 2]).unwrap() {
                assert!(v.is_clean(), "{a}: {:?}", v.trace_problems);
            }
        }
    }
}
