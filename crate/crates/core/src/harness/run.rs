use serde::{Deserialize, Serialize};

use crate::algorithms::{hedge_default_rate, HedgeState, SquintState};
use crate::domain::{
    instantaneous_regret, ExpertPrior, LearningRateGrid, LossVector, ProbabilityVector,
    RegretLedger,
};
use crate::envsim::{generate, EnvironmentSpec, LossMatrix};
use crate::error::{Error, Result};
use crate::harness::config::{Algorithm, ExperimentConfig};
use crate::meta::{BaseLearner, BoxPrior, Cbce, CbceBoxSummary, SquintCeBoxSummary, SquintCeState};

/// One round of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub t: usize,
    pub losses: Vec<f64>,
    pub weights: Vec<f64>,
    pub regret: Vec<f64>,
    /// The learner's mix loss of the surrogate losses, for Squint and
    /// Squint-CE.
    pub ghat: Option<f64>,
    /// Boxes with positive meta weight, for the meta-algorithms.
    pub q_support: Option<usize>,
}

/// Numerical cross-checks gathered during a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Max gap between the two weight routes (Squint: regret form against
    /// posterior marginalization; Squint-CE: closed form against mixture).
    pub max_route_gap: f64,
    /// Max `|ĝ_t(q_t) − ĝ_t(q̃_t)|`.
    pub max_equivalence_gap: f64,
    pub min_ghat: f64,
    /// Rounds where the meta weights fell back to the prior.
    pub fallback_rounds: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            max_route_gap: 0.0,
            max_equivalence_gap: 0.0,
            min_ghat: f64::INFINITY,
            fallback_rounds: 0,
        }
    }
}

/// Everything needed to evaluate interval regret and every bound after the
/// fact.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub environment: EnvironmentSpec,
    pub prior: ExpertPrior,
    pub ew_rate: f64,
    pub hedge_rate: Option<f64>,
    /// `Γ` used by Squint and by every Squint-CE box.
    pub grid: Option<LearningRateGrid>,
    /// Squint's final `ln Z_{T+1}`.
    pub log_normalizer: Option<f64>,
    pub rows: Vec<RoundRow>,
    pub ledger: RegretLedger,
    /// `|B|`.
    pub box_count: Option<usize>,
    pub cbce_boxes: Vec<CbceBoxSummary>,
    pub squint_ce_boxes: Vec<SquintCeBoxSummary>,
    /// Number of (round, active box) pairs.
    pub box_updates: u64,
    pub diagnostics: Diagnostics,
}

impl RunRecord {
    pub fn horizon(&self) -> usize {
        self.rows.len()
    }

    pub fn experts(&self) -> usize {
        self.prior.experts()
    }

    /// `Σ_{t∈[a,b]} ĝ_t`, zero when `ĝ` is not recorded.
    pub fn ghat_prefix(&self) -> Vec<f64> {
        let mut prefix = Vec::with_capacity(self.rows.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for r in &self.rows {
            acc += r.ghat.unwrap_or(0.0);
            prefix.push(acc);
        }
        prefix
    }

    /// Cumulative expert losses, `(T+1) × K`.
    pub fn loss_prefix(&self) -> Vec<Vec<f64>> {
        let k = self.experts();
        let mut prefix = vec![vec![0.0; k]];
        for r in &self.rows {
            let last = prefix.last().expect("nonempty");
            let next: Vec<f64> = last.iter().zip(&r.losses).map(|(a, b)| a + b).collect();
            prefix.push(next);
        }
        prefix
    }
}

/// Generates the environment and runs the configured learner on it.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord> {
    config.validate()?;
    let losses = generate(&config.environment)?;
    run_on(config, &losses)
}

#[allow(clippy::too_many_arguments)]
fn push_row(
    rows: &mut Vec<RoundRow>,
    ledger: &mut RegretLedger,
    t: usize,
    l: &LossVector,
    w: &ProbabilityVector,
    regret: Vec<f64>,
    ghat: Option<f64>,
    q_support: Option<usize>,
) -> Result<()> {
    ledger.push(&regret)?;
    rows.push(RoundRow {
        t,
        losses: l.as_slice().to_vec(),
        weights: w.as_slice().to_vec(),
        regret,
        ghat,
        q_support,
    });
    Ok(())
}

/// Runs the configured learner on given losses.
pub fn run_on(config: &ExperimentConfig, losses: &LossMatrix) -> Result<RunRecord> {
    let horizon = config.horizon();
    if losses.horizon() != horizon || losses.experts() != config.experts() {
        return Err(Error::MismatchedEnvironments(format!(
            "loss matrix is {}×{}, config wants {}×{}",
            losses.horizon(),
            losses.experts(),
            horizon,
            config.experts()
        )));
    }
    let prior = config.expert_prior()?;
    let k = prior.experts();
    let mut rows = Vec::with_capacity(horizon);
    let mut ledger = RegretLedger::new(k)?;
    let mut diag = Diagnostics::default();
    let mut record = RunRecord {
        algorithm: config.algorithm,
        environment: config.environment.clone(),
        prior: prior.clone(),
        ew_rate: config.ew_rate,
        hedge_rate: None,
        grid: None,
        log_normalizer: None,
        rows: Vec::new(),
        ledger: RegretLedger::new(k)?,
        box_count: None,
        cbce_boxes: Vec::new(),
        squint_ce_boxes: Vec::new(),
        box_updates: 0,
        diagnostics: Diagnostics::default(),
    };

    match config.algorithm {
        Algorithm::Hedge => {
            let rate = match config.hedge_rate {
                Some(r) => r,
                None if k < 2 => 0.0,
                None => hedge_default_rate(horizon, k)?,
            };
            record.hedge_rate = Some(rate);
            let mut h = HedgeState::new(prior.clone(), rate)?;
            for t in 1..=horizon {
                let l = losses.round(t);
                let w = h.weights();
                let r = instantaneous_regret(&w, l).map_err(|e| e.at_round(t))?;
                h.update(l).map_err(|e| e.at_round(t))?;
                push_row(&mut rows, &mut ledger, t, l, &w, r, None, None)
                    .map_err(|e| e.at_round(t))?;
            }
        }
        Algorithm::Squint => {
            let grid = LearningRateGrid::build(horizon)?;
            let mut s = SquintState::with_ew_rate(grid.clone(), prior.clone(), config.ew_rate)?;
            record.grid = Some(grid);
            for t in 1..=horizon {
                let l = losses.round(t);
                let w = s.weights();
                diag.max_route_gap = diag
                    .max_route_gap
                    .max(w.max_abs_diff(&s.weights_from_regret()));
                let step = s.update(&w, l).map_err(|e| e.at_round(t))?;
                diag.min_ghat = diag.min_ghat.min(step.mix_loss);
                push_row(
                    &mut rows,
                    &mut ledger,
                    t,
                    l,
                    &w,
                    step.regret,
                    Some(step.mix_loss),
                    None,
                )
                .map_err(|e| e.at_round(t))?;
            }
            record.log_normalizer = Some(s.log_normalizer());
        }
        Algorithm::CbceHedge | Algorithm::CbceSquint => {
            let base = if config.algorithm == Algorithm::CbceHedge {
                BaseLearner::Hedge
            } else {
                BaseLearner::Squint
            };
            let mut c = Cbce::new(horizon, base, prior.clone())?;
            record.box_count = Some(c.state().schedule().len());
            for t in 1..=horizon {
                let l = losses.round(t);
                let round = c.round(l).map_err(|e| e.at_round(t))?;
                if round.fallback {
                    diag.fallback_rounds += 1;
                }
                let support = round.q.iter().filter(|q| **q > 0.0).count();
                push_row(
                    &mut rows,
                    &mut ledger,
                    t,
                    l,
                    &round.weights,
                    round.regret,
                    None,
                    Some(support),
                )
                .map_err(|e| e.at_round(t))?;
            }
            record.box_updates = c.box_updates();
            record.cbce_boxes = c.into_summaries();
        }
        Algorithm::SquintCeUniform | Algorithm::SquintCeJun => {
            let box_prior = if config.algorithm == Algorithm::SquintCeUniform {
                BoxPrior::Uniform
            } else {
                BoxPrior::Jun
            };
            let mut s = SquintCeState::new(horizon, prior.clone(), box_prior)?;
            s.set_ew_rate(config.ew_rate)?;
            record.grid = Some(s.grid().clone());
            record.box_count = Some(s.schedule().len());
            for t in 1..=horizon {
                let l = losses.round(t);
                let round = s.step(l).map_err(|e| e.at_round(t))?;
                diag.max_route_gap = diag.max_route_gap.max(round.route_gap);
                if let Some(full) = round.ghat_full {
                    diag.max_equivalence_gap =
                        diag.max_equivalence_gap.max((full - round.ghat).abs());
                }
                diag.min_ghat = diag.min_ghat.min(round.ghat);
                if round.fallback {
                    diag.fallback_rounds += 1;
                }
                let support = round.q.iter().filter(|q| **q > 0.0).count();
                push_row(
                    &mut rows,
                    &mut ledger,
                    t,
                    l,
                    &round.weights,
                    round.regret,
                    Some(round.ghat),
                    Some(support),
                )
                .map_err(|e| e.at_round(t))?;
            }
            record.box_updates = s.box_updates();
            record.squint_ce_boxes = s.into_summaries();
        }
    }
    record.rows = rows;
    record.ledger = ledger;
    record.diagnostics = diag;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envsim::{scenario, Generator, Segment};

    fn constant_env(k: usize, t: usize, v: f64) -> EnvironmentSpec {
        EnvironmentSpec {
            experts: k,
            horizon: t,
            seed: 0,
            segments: vec![Segment {
                start: 1,
                generator: Generator::Constant { losses: vec![v; k] },
            }],
        }
    }

    #[test]
    fn single_expert_never_regrets() {
        for a in Algorithm::ALL {
            let env = scenario("two-switch", 1, 40, 3).unwrap();
            let rec = run(&ExperimentConfig::new(a, env)).unwrap();
            assert_eq!(rec.rows.len(), 40);
            assert!(rec.rows.iter().all(|r| r.regret == vec![0.0]), "{a}");
        }
    }

    #[test]
    fn equal_losses_play_the_prior() {
        for a in Algorithm::ALL {
            let mut c = ExperimentConfig::new(a, constant_env(3, 33, 0.7));
            c.prior = Some(vec![0.5, 0.3, 0.2]);
            let rec = run(&c).unwrap();
            for r in &rec.rows {
                for (w, p) in r.weights.iter().zip([0.5, 0.3, 0.2]) {
                    assert!((w - p).abs() < 1e-12, "{a} t={} w={w}", r.t);
                }
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let env = scenario("drift", 3, 64, 8).unwrap();
        for a in Algorithm::ALL {
            let c = ExperimentConfig::new(a, env.clone());
            assert_eq!(run(&c).unwrap().rows, run(&c).unwrap().rows);
        }
    }

    #[test]
    fn box_update_counts() {
        let env = scenario("stationary", 2, 100, 1).unwrap();
        let cb = run(&ExperimentConfig::new(Algorithm::CbceHedge, env.clone())).unwrap();
        let expected: u64 = (1..=100u64).map(|t| 1 + t.ilog2() as u64).sum();
        assert_eq!(cb.box_updates, expected);
        let sc = run(&ExperimentConfig::new(Algorithm::SquintCeUniform, env)).unwrap();
        assert!(sc.box_updates < expected);
    }

    #[test]
    fn mismatched_losses_are_rejected() {
        let c = ExperimentConfig::new(Algorithm::Hedge, constant_env(2, 5, 0.1));
        let other = generate(&constant_env(2, 6, 0.1)).unwrap();
        assert!(run_on(&c, &other).is_err());
    }
}
