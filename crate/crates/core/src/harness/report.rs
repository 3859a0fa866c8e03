//! Post-hoc evaluation of a run: regret bounds per interval and comparator,
//! and the surrogate-regret inequalities the bounds are built from.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algorithms::{
    bound_a, comparator, comparator_kl, comparator_kl_direct, hedge_bound, hedge_default_rate,
    squint_bound,
};
use crate::covering::{partition, CoveringSchedule};
use crate::domain::{regret_over_set, ExpertSet, Interval};
use crate::error::Result;
use crate::harness::config::{Algorithm, ComparatorPolicy, ExperimentConfig, IntervalPolicy};
use crate::harness::run::RunRecord;
use crate::meta::{
    bound_a_hat, bound_a_hat_ln2t, bound_a_tilde, cbce_hedge_bound, cbce_meta_bound,
    CbceBoxSummary, SquintCeBoxSummary,
};

/// Slack below `−BOUND_TOLERANCE` on an asserted row is a violation.
pub const BOUND_TOLERANCE: f64 = 1e-9;
/// Tolerance for `ĝ_t ≥ 0`.
pub const MIX_LOSS_TOLERANCE: f64 = 1e-12;

/// The intervals a policy selects inside `[1, horizon]`, sorted and distinct.
pub fn intervals(policy: IntervalPolicy, horizon: usize, seed: u64) -> Result<Vec<Interval>> {
    let mut out = BTreeSet::new();
    let full = Interval::new(1, horizon)?;
    let dyadic = |out: &mut BTreeSet<Interval>| -> Result<()> {
        out.insert(full);
        for j in CoveringSchedule::enumerate_boxes(horizon)?.boxes() {
            out.insert(j.interval());
        }
        Ok(())
    };
    let sampled = |out: &mut BTreeSet<Interval>, n: usize| -> Result<()> {
        out.insert(full);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a7e_5a4d_0c0f_fee5);
        for _ in 0..n {
            let a = rng.gen_range(1..=horizon);
            let b = rng.gen_range(1..=horizon);
            out.insert(Interval::new(a.min(b), a.max(b))?);
        }
        Ok(())
    };
    match policy.resolve(horizon) {
        IntervalPolicy::Auto | IntervalPolicy::Exhaustive => {
            return Ok(crate::domain::all_intervals(horizon).collect())
        }
        IntervalPolicy::Dyadic => dyadic(&mut out)?,
        IntervalPolicy::Sampled(n) => sampled(&mut out, n)?,
        IntervalPolicy::DyadicSampled(n) => {
            dyadic(&mut out)?;
            sampled(&mut out, n)?;
        }
    }
    Ok(out.into_iter().collect())
}

/// A comparator `𝒦` as chosen for one interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comparator {
    Expert(usize),
    /// Least cumulative loss on the interval, ties to the lowest index.
    RealizedBest(usize),
    /// The `⌈K/2⌉` experts with least loss on the interval.
    TopHalf(ExpertSet),
    Fixed(ExpertSet),
    /// The meta-algorithm against the box of this interval.
    Meta,
}

impl Comparator {
    pub fn set(&self) -> Option<ExpertSet> {
        match self {
            Comparator::Expert(k) | Comparator::RealizedBest(k) => Some(ExpertSet::singleton(*k)),
            Comparator::TopHalf(s) | Comparator::Fixed(s) => Some(s.clone()),
            Comparator::Meta => None,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comparator::Expert(k) => write!(f, "{}", k + 1),
            Comparator::RealizedBest(k) => write!(f, "best:{}", k + 1),
            Comparator::TopHalf(s) => write!(f, "top:{}", s.label()),
            Comparator::Fixed(s) => f.write_str(&s.label()),
            Comparator::Meta => f.write_str("meta"),
        }
    }
}

impl Serialize for Comparator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Experts ordered by cumulative loss on `interval`, ties to the lower index.
fn ranked_experts(loss_prefix: &[Vec<f64>], interval: Interval) -> Vec<usize> {
    let hi = &loss_prefix[interval.end()];
    let lo = &loss_prefix[interval.start() - 1];
    let totals: Vec<f64> = hi.iter().zip(lo).map(|(a, b)| a - b).collect();
    let mut order: Vec<usize> = (0..totals.len()).collect();
    order.sort_by(|&a, &b| totals[a].total_cmp(&totals[b]).then(a.cmp(&b)));
    order
}

/// The comparators a policy selects on one interval.
pub fn comparators(
    policy: &ComparatorPolicy,
    fixed: &[ExpertSet],
    loss_prefix: &[Vec<f64>],
    interval: Interval,
) -> Result<Vec<Comparator>> {
    let k = loss_prefix[0].len();
    let mut out = Vec::new();
    if policy.singletons {
        out.extend((0..k).map(Comparator::Expert));
    }
    if policy.realized_best || policy.top_half {
        let order = ranked_experts(loss_prefix, interval);
        if policy.realized_best {
            out.push(Comparator::RealizedBest(order[0]));
        }
        if policy.top_half {
            let half = order[..k.div_ceil(2)].to_vec();
            out.push(Comparator::TopHalf(ExpertSet::new(half, k)?));
        }
    }
    out.extend(fixed.iter().cloned().map(Comparator::Fixed));
    Ok(out)
}

/// One measured-versus-bound comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub interval: Interval,
    pub comparator: Comparator,
    pub regret: f64,
    pub variance: f64,
    pub bound_name: &'static str,
    pub bound: f64,
    /// `bound − regret`.
    pub slack: f64,
    /// Whether the bound's preconditions hold for this run.
    pub asserted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub algorithm: Algorithm,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    /// Asserted rows with slack below `−BOUND_TOLERANCE`.
    pub fn violations(&self) -> Vec<&BoundRow> {
        self.rows
            .iter()
            .filter(|r| r.asserted && r.slack < -BOUND_TOLERANCE)
            .collect()
    }

    /// Least slack over asserted rows.
    pub fn min_slack(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.asserted)
            .map(|r| r.slack)
            .min_by(f64::total_cmp)
    }

    pub fn asserted_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.asserted).count()
    }

    pub fn is_clean(&self) -> bool {
        self.violations().is_empty()
    }
}

/// Everything the per-interval loops share.
struct Context<'a> {
    record: &'a RunRecord,
    policy: &'a ComparatorPolicy,
    fixed: Vec<ExpertSet>,
    loss_prefix: Vec<Vec<f64>>,
    intervals: Vec<Interval>,
}

impl<'a> Context<'a> {
    fn new(record: &'a RunRecord, config: &'a ExperimentConfig) -> Result<Self> {
        Ok(Self {
            record,
            policy: &config.comparators,
            fixed: config.fixed_sets()?,
            loss_prefix: record.loss_prefix(),
            intervals: intervals(config.intervals, record.horizon(), record.environment.seed)?,
        })
    }

    fn full(&self) -> Result<Interval> {
        Interval::new(1, self.record.horizon())
    }

    fn comparators(&self, interval: Interval) -> Result<Vec<Comparator>> {
        comparators(self.policy, &self.fixed, &self.loss_prefix, interval)
    }

    /// `(R_I^𝒦, V_I^𝒦, π(𝒦))`.
    fn measure(&self, set: &ExpertSet, interval: Interval) -> Result<(f64, f64, f64)> {
        let (r, v) = regret_over_set(&self.record.ledger, &self.record.prior, set, interval)?;
        Ok((r, v, self.record.prior.mass(set)))
    }
}

fn row(
    interval: Interval,
    comparator: Comparator,
    regret: f64,
    variance: f64,
    bound_name: &'static str,
    bound: f64,
    asserted: bool,
) -> BoundRow {
    BoundRow {
        interval,
        comparator,
        regret,
        variance,
        bound_name,
        bound,
        slack: bound - regret,
        asserted,
    }
}

fn cbce_by_interval(boxes: &[CbceBoxSummary]) -> HashMap<(usize, usize), &CbceBoxSummary> {
    boxes
        .iter()
        .map(|b| ((b.interval.start(), b.interval.end()), b))
        .collect()
}

fn squint_ce_by_interval(
    boxes: &[SquintCeBoxSummary],
) -> HashMap<(usize, usize), &SquintCeBoxSummary> {
    boxes
        .iter()
        .map(|b| ((b.interval.start(), b.interval.end()), b))
        .collect()
}

/// `Σ_i [√(|J_i|(7 ln J_i2 + 5)) + 2√(2 V A_{|J_i|}) + 4 A_{|J_i|}]` over the
/// partition of `interval`, with `V` the box's own variance on `J_i`.
fn cbce_squint_bound(
    record: &RunRecord,
    boxes: &HashMap<(usize, usize), &CbceBoxSummary>,
    interval: Interval,
    set: &ExpertSet,
    mass: f64,
) -> Result<f64> {
    let cond = record.prior.conditional(set)?;
    let mut total = 0.0;
    for j in partition(interval).pieces() {
        let b = boxes[&(j.start(), j.end())];
        let vb: f64 = set
            .members()
            .iter()
            .map(|&e| cond[e] * b.box_variance[e])
            .sum();
        total += cbce_meta_bound(*j) + squint_bound(vb, bound_a(j.len(), mass)?);
    }
    Ok(total)
}

/// The main bound of the run's algorithm for one interval and comparator:
/// Hedge and Squint only on `[1, T]`, Squint-CE with `ln 2T` (uniform `τ`)
/// or `Ã` (Jun prior). `None` where the algorithm has no bound.
pub fn headline_bound(
    record: &RunRecord,
    interval: Interval,
    set: &ExpertSet,
) -> Result<Option<f64>> {
    let horizon = record.horizon();
    let k = record.experts();
    let is_full = interval.start() == 1 && interval.end() == horizon;
    let mass = record.prior.mass(set);
    let (_, v) = regret_over_set(&record.ledger, &record.prior, set, interval)?;
    Ok(match record.algorithm {
        Algorithm::Hedge if is_full => Some(hedge_bound(horizon, k)),
        Algorithm::Squint if is_full => Some(squint_bound(v, bound_a(horizon, mass)?)),
        Algorithm::Hedge | Algorithm::Squint => None,
        Algorithm::CbceHedge => Some(cbce_hedge_bound(interval, k)),
        Algorithm::CbceSquint => {
            let boxes = cbce_by_interval(&record.cbce_boxes);
            Some(cbce_squint_bound(record, &boxes, interval, set, mass)?)
        }
        Algorithm::SquintCeUniform => {
            Some(squint_bound(v, bound_a_hat_ln2t(interval, horizon, mass)?))
        }
        Algorithm::SquintCeJun => Some(squint_bound(v, bound_a_tilde(interval, horizon, mass)?)),
    })
}

/// Evaluates every bound that applies to the run's algorithm.
///
/// Rows whose preconditions do not hold (non-uniform prior for Hedge, a
/// retuned Hedge rate, `η_EW ≠ 1`, and all CBCE rows) are reported with
/// `asserted = false`.
pub fn evaluate_bounds(record: &RunRecord, config: &ExperimentConfig) -> Result<BoundReport> {
    let cx = Context::new(record, config)?;
    let horizon = record.horizon();
    let k = record.experts();
    let mut rows = Vec::new();
    match record.algorithm {
        Algorithm::Hedge => {
            let default_rate = if k < 2 {
                0.0
            } else {
                hedge_default_rate(horizon, k)?
            };
            let asserted = record.prior.is_uniform() && record.hedge_rate == Some(default_rate);
            let full = cx.full()?;
            let bound = hedge_bound(horizon, k);
            for c in cx.comparators(full)? {
                let set = c.set().expect("expert comparator");
                let (r, v, _) = cx.measure(&set, full)?;
                rows.push(row(full, c, r, v, "hedge", bound, asserted));
            }
        }
        Algorithm::Squint => {
            let asserted = record.ew_rate == 1.0;
            let full = cx.full()?;
            for c in cx.comparators(full)? {
                let set = c.set().expect("expert comparator");
                let (r, v, mass) = cx.measure(&set, full)?;
                let bound = squint_bound(v, bound_a(horizon, mass)?);
                rows.push(row(full, c, r, v, "squint", bound, asserted));
            }
        }
        Algorithm::CbceHedge | Algorithm::CbceSquint => {
            let boxes = cbce_by_interval(&record.cbce_boxes);
            for &interval in &cx.intervals {
                for c in cx.comparators(interval)? {
                    let set = c.set().expect("expert comparator");
                    let (r, v, mass) = cx.measure(&set, interval)?;
                    let bound = if record.algorithm == Algorithm::CbceHedge {
                        cbce_hedge_bound(interval, k)
                    } else {
                        cbce_squint_bound(record, &boxes, interval, &set, mass)?
                    };
                    rows.push(row(
                        interval,
                        c,
                        r,
                        v,
                        record.algorithm.name(),
                        bound,
                        false,
                    ));
                }
            }
            for b in &record.cbce_boxes {
                if b.rounds == b.interval.len() {
                    rows.push(row(
                        b.interval.interval(),
                        Comparator::Meta,
                        b.meta_regret,
                        0.0,
                        "cbce-meta",
                        cbce_meta_bound(b.interval),
                        false,
                    ));
                }
            }
        }
        Algorithm::SquintCeUniform | Algorithm::SquintCeJun => {
            let asserted = record.ew_rate == 1.0;
            let box_count = record.box_count.unwrap_or(1);
            for &interval in &cx.intervals {
                for c in cx.comparators(interval)? {
                    let set = c.set().expect("expert comparator");
                    let (r, v, mass) = cx.measure(&set, interval)?;
                    if record.algorithm == Algorithm::SquintCeUniform {
                        let a = bound_a_hat_ln2t(interval, horizon, mass)?;
                        rows.push(row(
                            interval,
                            c.clone(),
                            r,
                            v,
                            "squint-ce",
                            squint_bound(v, a),
                            asserted,
                        ));
                        let a = bound_a_hat(interval, horizon, box_count, mass)?;
                        rows.push(row(
                            interval,
                            c,
                            r,
                            v,
                            "squint-ce-exact",
                            squint_bound(v, a),
                            asserted,
                        ));
                    } else {
                        let a = bound_a_tilde(interval, horizon, mass)?;
                        rows.push(row(
                            interval,
                            c,
                            r,
                            v,
                            "squint-ce-jun",
                            squint_bound(v, a),
                            asserted,
                        ));
                    }
                }
            }
        }
    }
    Ok(BoundReport {
        algorithm: record.algorithm,
        rows,
    })
}

/// One instance of a surrogate inequality or identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurrogateCheck {
    pub name: &'static str,
    pub interval: Interval,
    pub comparator: Option<Comparator>,
    pub eta: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    /// `lhs = rhs` rather than `lhs ≤ rhs`.
    pub equality: bool,
}

impl SurrogateCheck {
    /// `rhs − lhs` for inequalities, `−|lhs − rhs|` for identities.
    pub fn margin(&self) -> f64 {
        if self.equality {
            -(self.lhs - self.rhs).abs()
        } else {
            self.rhs - self.lhs
        }
    }

    pub fn holds(&self) -> bool {
        self.margin() >= -self.tolerance
    }
}

/// Aggregate of all instances of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub count: usize,
    pub worst_margin: f64,
    pub violations: Vec<SurrogateCheck>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SurrogateReport {
    pub checks: Vec<CheckSummary>,
}

impl SurrogateReport {
    fn push(&mut self, check: SurrogateCheck) {
        let idx = match self.checks.iter().position(|c| c.name == check.name) {
            Some(i) => i,
            None => {
                self.checks.push(CheckSummary {
                    name: check.name,
                    count: 0,
                    worst_margin: f64::INFINITY,
                    violations: Vec::new(),
                });
                self.checks.len() - 1
            }
        };
        let summary = &mut self.checks[idx];
        summary.count += 1;
        summary.worst_margin = summary.worst_margin.min(check.margin());
        if !check.holds() {
            summary.violations.push(check);
        }
    }

    pub fn get(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn violation_count(&self) -> usize {
        self.checks.iter().map(|c| c.violations.len()).sum()
    }

    pub fn is_clean(&self) -> bool {
        self.violation_count() == 0
    }
}

#[allow(clippy::too_many_arguments)]
fn check(
    name: &'static str,
    interval: Interval,
    comparator: Option<Comparator>,
    eta: Option<f64>,
    lhs: f64,
    rhs: f64,
    tolerance: f64,
    equality: bool,
) -> SurrogateCheck {
    SurrogateCheck {
        name,
        interval,
        comparator,
        eta,
        lhs,
        rhs,
        tolerance,
        equality,
    }
}

/// Evaluates the surrogate inequalities and the numerical identities the
/// run's algorithm admits.
///
/// The surrogate checks need `η_EW = 1` and are skipped otherwise.
pub fn evaluate_surrogates(
    record: &RunRecord,
    config: &ExperimentConfig,
) -> Result<SurrogateReport> {
    let cx = Context::new(record, config)?;
    let mut report = SurrogateReport::default();
    let tol = BOUND_TOLERANCE;
    let full = cx.full()?;
    let ghat = record.ghat_prefix();
    let ghat_over = |i: Interval| ghat[i.end()] - ghat[i.start() - 1];

    for r in &record.rows {
        if let Some(g) = r.ghat {
            let at = Interval::new(r.t, r.t)?;
            report.push(check(
                "mix-loss-nonnegative",
                at,
                None,
                None,
                -g,
                0.0,
                MIX_LOSS_TOLERANCE,
                false,
            ));
        }
    }

    match record.algorithm {
        Algorithm::Hedge => {}
        Algorithm::Squint => {
            report.push(check(
                "weight-routes",
                full,
                None,
                None,
                record.diagnostics.max_route_gap,
                0.0,
                tol,
                false,
            ));
            if record.ew_rate == 1.0 {
                let grid = record.grid.as_ref().expect("squint records its grid");
                let log_z = record.log_normalizer.expect("squint records ln Z");
                report.push(check(
                    "mix-loss-telescoping",
                    full,
                    None,
                    None,
                    ghat_over(full),
                    -log_z,
                    tol,
                    true,
                ));
                for c in cx.comparators(full)? {
                    let set = c.set().expect("expert comparator");
                    let (r, v, _) = cx.measure(&set, full)?;
                    for (i, &eta) in grid.rates().iter().enumerate() {
                        let s = -log_z - (-eta * r + eta * eta * v);
                        report.push(check(
                            "surrogate-decomposition",
                            full,
                            Some(c.clone()),
                            Some(eta),
                            eta * r,
                            eta * eta * v + s,
                            tol,
                            false,
                        ));
                        let kl = comparator_kl(grid, &record.prior, i, &set)?;
                        report.push(check(
                            "surrogate-kl",
                            full,
                            Some(c.clone()),
                            Some(eta),
                            s,
                            kl,
                            tol,
                            false,
                        ));
                        let q = comparator(grid, &record.prior, i, &set)?;
                        report.push(check(
                            "kl-closed-form",
                            full,
                            Some(c.clone()),
                            Some(eta),
                            kl,
                            comparator_kl_direct(grid, &record.prior, &q)?,
                            tol,
                            true,
                        ));
                    }
                }
            }
        }
        Algorithm::CbceHedge | Algorithm::CbceSquint => {
            let boxes = cbce_by_interval(&record.cbce_boxes);
            for &interval in &cx.intervals {
                let pieces = partition(interval);
                for e in 0..record.experts() {
                    let split: f64 = pieces
                        .pieces()
                        .iter()
                        .map(|j| {
                            let b = boxes[&(j.start(), j.end())];
                            b.meta_regret + b.box_regret[e]
                        })
                        .sum();
                    report.push(check(
                        "regret-split",
                        interval,
                        Some(Comparator::Expert(e)),
                        None,
                        record.ledger.regret(e, interval)?,
                        split,
                        tol,
                        true,
                    ));
                }
            }
        }
        Algorithm::SquintCeUniform | Algorithm::SquintCeJun => {
            report.push(check(
                "weight-routes",
                full,
                None,
                None,
                record.diagnostics.max_route_gap,
                0.0,
                tol,
                false,
            ));
            report.push(check(
                "learner-mix-equivalence",
                full,
                None,
                None,
                record.diagnostics.max_equivalence_gap,
                0.0,
                tol,
                false,
            ));
            if record.ew_rate == 1.0 {
                squint_ce_surrogates(&cx, &mut report, &ghat_over)?;
            }
        }
    }
    Ok(report)
}

fn squint_ce_surrogates(
    cx: &Context<'_>,
    report: &mut SurrogateReport,
    ghat_over: &dyn Fn(Interval) -> f64,
) -> Result<()> {
    let record = cx.record;
    let tol = BOUND_TOLERANCE;
    let grid = record.grid.as_ref().expect("squint-ce records its grid");
    let boxes = squint_ce_by_interval(&record.squint_ce_boxes);
    let box_count = record.squint_ce_boxes.len() as f64;
    let ln_grid = (grid.len() as f64).ln();

    for &interval in &cx.intervals {
        let pieces = partition(interval);
        let gi = ghat_over(interval);
        for c in cx.comparators(interval)? {
            let set = c.set().expect("expert comparator");
            let (r, v, _) = cx.measure(&set, interval)?;
            let piece_rv: Vec<(f64, f64, &SquintCeBoxSummary)> = pieces
                .pieces()
                .iter()
                .map(|j| {
                    let (rj, vj, _) = cx.measure(&set, j.interval())?;
                    Ok((rj, vj, boxes[&(j.start(), j.end())]))
                })
                .collect::<Result<_>>()?;
            for &eta in grid.rates() {
                let s = gi + eta * r - eta * eta * v;
                report.push(check(
                    "surrogate-decomposition",
                    interval,
                    Some(c.clone()),
                    Some(eta),
                    eta * r,
                    eta * eta * v + s,
                    tol,
                    false,
                ));
                let split: f64 = piece_rv
                    .iter()
                    .map(|(rj, vj, b)| {
                        let meta = b.meta_surrogate_regret();
                        let black_box = b.box_mix_loss + eta * rj - eta * eta * vj;
                        meta + black_box
                    })
                    .sum();
                report.push(check(
                    "surrogate-split",
                    interval,
                    Some(c.clone()),
                    Some(eta),
                    s,
                    split,
                    tol,
                    true,
                ));
            }
        }
    }

    for b in &record.squint_ce_boxes {
        if b.rounds != b.interval.len() {
            continue;
        }
        let j = b.interval.interval();
        let meta = b.meta_surrogate_regret();
        report.push(check(
            "meta-surrogate-prior",
            j,
            Some(Comparator::Meta),
            None,
            meta,
            -b.prior.ln(),
            tol,
            false,
        ));
        let cap = if record.algorithm == Algorithm::SquintCeUniform {
            box_count.ln()
        } else {
            0.5 + 3.0 * (j.end() as f64).ln()
        };
        report.push(check(
            "meta-surrogate",
            j,
            Some(Comparator::Meta),
            None,
            meta,
            cap,
            tol,
            false,
        ));
        for c in cx.comparators(j)? {
            let set = c.set().expect("expert comparator");
            let (r, v, mass) = cx.measure(&set, j)?;
            for &eta in grid.rates() {
                report.push(check(
                    "box-surrogate",
                    j,
                    Some(c.clone()),
                    Some(eta),
                    b.box_mix_loss + eta * r - eta * eta * v,
                    ln_grid - mass.ln(),
                    tol,
                    false,
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envsim::{scenario, EnvironmentSpec, Generator, Segment};
    use crate::harness::run::run;

    fn config(a: Algorithm, env: EnvironmentSpec) -> ExperimentConfig {
        ExperimentConfig::new(a, env)
    }

    #[test]
    fn interval_policies() {
        assert_eq!(
            intervals(IntervalPolicy::Exhaustive, 10, 0).unwrap().len(),
            55
        );
        let d = intervals(IntervalPolicy::Dyadic, 8, 0).unwrap();
        assert!(d.contains(&Interval::new(1, 8).unwrap()));
        assert!(d.contains(&Interval::new(4, 7).unwrap()));
        assert!(d.iter().all(|i| i.end() <= 8));
        let s1 = intervals(IntervalPolicy::Sampled(30), 500, 4).unwrap();
        let s2 = intervals(IntervalPolicy::Sampled(30), 500, 4).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.len() <= 31 && s1.len() > 20);
        assert!(s1.windows(2).all(|w| w[0] < w[1]));
        let auto = intervals(IntervalPolicy::Auto, 300, 1).unwrap();
        assert!(auto.len() > 200);
    }

    #[test]
    fn comparator_selection() {
        let prefix = vec![
            vec![0.0, 0.0, 0.0],
            vec![0.5, 0.2, 0.2],
            vec![1.0, 0.4, 1.2],
        ];
        let p = ComparatorPolicy::default();
        let one = Interval::new(1, 1).unwrap();
        let cs = comparators(&p, &[], &prefix, one).unwrap();
        let labels: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
        assert_eq!(labels, ["1", "2", "3", "best:2", "top:2|3"]);
        let both = Interval::new(1, 2).unwrap();
        let cs = comparators(&p, &[], &prefix, both).unwrap();
        assert_eq!(cs[3], Comparator::RealizedBest(1));
        assert_eq!(cs[4].to_string(), "top:1|2");
    }

    #[test]
    fn zero_losses_give_zero_regret_and_nonnegative_slack() {
        let env = EnvironmentSpec {
            experts: 3,
            horizon: 20,
            seed: 0,
            segments: vec![Segment {
                start: 1,
                generator: Generator::Constant {
                    losses: vec![0.0; 3],
                },
            }],
        };
        for a in Algorithm::ALL {
            let c = config(a, env.clone());
            let rec = run(&c).unwrap();
            let rep = evaluate_bounds(&rec, &c).unwrap();
            assert!(!rep.rows.is_empty());
            for r in &rep.rows {
                assert_eq!(r.regret, 0.0);
                assert!(r.slack >= 0.0 && r.slack == r.bound, "{a} {r:?}");
            }
        }
    }

    #[test]
    fn hedge_full_horizon_bound() {
        let env = scenario("single-switch", 2, 256, 11).unwrap();
        let c = config(Algorithm::Hedge, env);
        let rec = run(&c).unwrap();
        let rep = evaluate_bounds(&rec, &c).unwrap();
        let cap = (128.0 * 2f64.ln()).sqrt();
        for r in &rep.rows {
            assert!(r.asserted);
            assert!((r.bound - cap).abs() < 1e-12);
        }
        assert!(rep.is_clean());
    }

    #[test]
    fn squint_ce_exhaustive_t64_is_clean() {
        for (a, seed) in [(Algorithm::SquintCeUniform, 2), (Algorithm::SquintCeJun, 3)] {
            let env = scenario("two-switch", 3, 64, seed).unwrap();
            let c = config(a, env);
            let rec = run(&c).unwrap();
            let rep = evaluate_bounds(&rec, &c).unwrap();
            assert_eq!(rep.asserted_rows(), rep.rows.len());
            assert!(rep.is_clean(), "{:?}", rep.violations());
            let sur = evaluate_surrogates(&rec, &c).unwrap();
            assert!(sur.is_clean(), "{:?}", sur);
            for name in [
                "surrogate-decomposition",
                "surrogate-split",
                "box-surrogate",
                "meta-surrogate",
                "meta-surrogate-prior",
                "mix-loss-nonnegative",
            ] {
                assert!(sur.get(name).unwrap().count > 0, "{name}");
            }
        }
    }

    #[test]
    fn squint_surrogates_are_clean() {
        let env = scenario("drift", 4, 100, 5).unwrap();
        let mut c = config(Algorithm::Squint, env);
        c.comparators.sets = vec![vec![1, 4]];
        let rec = run(&c).unwrap();
        assert!(evaluate_bounds(&rec, &c).unwrap().is_clean());
        let sur = evaluate_surrogates(&rec, &c).unwrap();
        assert!(sur.is_clean(), "{sur:?}");
        assert!(sur.get("surrogate-kl").unwrap().count > 0);
        assert!(sur.get("mix-loss-telescoping").unwrap().count == 1);
    }

    #[test]
    fn cbce_rows_are_informational_and_regret_splits() {
        for a in [Algorithm::CbceHedge, Algorithm::CbceSquint] {
            let env = scenario("single-switch", 2, 40, 1).unwrap();
            let c = config(a, env);
            let rec = run(&c).unwrap();
            let rep = evaluate_bounds(&rec, &c).unwrap();
            assert!(rep.rows.iter().all(|r| !r.asserted));
            assert!(rep.rows.iter().any(|r| r.bound_name == "cbce-meta"));
            let sur = evaluate_surrogates(&rec, &c).unwrap();
            assert!(sur.is_clean(), "{sur:?}");
            assert_eq!(sur.get("regret-split").unwrap().count, 2 * 820);
        }
    }

    #[test]
    fn jun_and_uniform_caps_order() {
        // Ã ≤ Â whenever 1/2 + 3 ln I2 ≤ ln 2T.
        let t = 1000;
        for a in 1..=20usize {
            let i = Interval::new(a, a + 5).unwrap();
            let tilde = bound_a_tilde(i, t, 0.5).unwrap();
            let hat = bound_a_hat_ln2t(i, t, 0.5).unwrap();
            if 0.5 + 3.0 * (i.end() as f64).ln() <= (2.0 * t as f64).ln() {
                assert!(tilde <= hat);
            }
        }
    }
}
