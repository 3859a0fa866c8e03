//! Coin Betting for Changing Environment.
//!
//! [`CbceState`] is the meta-learner alone: it turns per-box weight vectors
//! into the learner's weights and accounts the betting statistics.
//! [`Cbce`] drives it together with lazily created Hedge or Squint boxes.
//!
//! The statistics follow the pseudocode term by term. Rounds before a box's
//! start contribute zero to every sum.

use serde::{Deserialize, Serialize};

use crate::algorithms::{HedgeState, SquintState};
use crate::covering::{BoxScope, CoveringInterval, CoveringSchedule};
use crate::domain::{ExpertPrior, LearningRateGrid, LossVector, ProbabilityVector};
use crate::error::{Error, Result};
use crate::meta::jun::JunPrior;

/// Meta regrets smaller than this count as exact ties.
pub const TIE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct BetSums {
    /// `Σ_{i<t} g_i`.
    sum_g: f64,
    /// `Σ_{i<t} z_i v_i`.
    wealth: f64,
}

/// The meta distribution for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct CbcePrediction {
    pub round: usize,
    /// Active box ids, sorted by level.
    pub active: Vec<usize>,
    pub z: Vec<f64>,
    pub v: Vec<f64>,
    /// `q_t` restricted to `active`.
    pub q: Vec<f64>,
    /// Whether `‖q̂_t‖₁ = 0` forced `q_t = τ_t`.
    pub fallback: bool,
}

/// One completed round.
#[derive(Debug, Clone, PartialEq)]
pub struct CbceStep {
    pub prediction: CbcePrediction,
    /// Learner weights `Σ_b q_t^b w_t^b`.
    pub weights: ProbabilityVector,
    /// `r_t^b(ℳ)` per active box.
    pub meta_regret: Vec<f64>,
    /// `g_t^b` per active box.
    pub g: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CbceState {
    schedule: CoveringSchedule,
    tau: ProbabilityVector,
    sums: Vec<BetSums>,
    round: usize,
}

impl CbceState {
    pub fn new(schedule: CoveringSchedule, tau: ProbabilityVector) -> Result<Self> {
        if tau.len() != schedule.len() {
            return Err(Error::DimensionMismatch {
                expected: schedule.len(),
                found: tau.len(),
            });
        }
        let n = schedule.len();
        Ok(Self {
            schedule,
            tau,
            sums: vec![BetSums::default(); n],
            round: 0,
        })
    }

    pub fn schedule(&self) -> &CoveringSchedule {
        &self.schedule
    }

    pub fn tau(&self) -> &ProbabilityVector {
        &self.tau
    }

    /// Rounds completed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    /// The distribution `q_t` for the next round.
    pub fn predict(&self) -> Result<CbcePrediction> {
        let t = self.round + 1;
        let active = self.schedule.active(t)?;
        let mut z = Vec::with_capacity(active.len());
        let mut v = Vec::with_capacity(active.len());
        let mut q_hat = Vec::with_capacity(active.len());
        for &b in &active {
            let j = self.schedule.get(b);
            let s = self.sums[b];
            let span = (t - j.start() + 1) as f64;
            let vb = (1.0 / span) * s.sum_g * (1.0 + s.wealth);
            z.push(s.sum_g);
            v.push(vb);
            q_hat.push(self.tau[b] * vb.max(0.0));
        }
        let norm: f64 = q_hat.iter().sum();
        let (q, fallback) = if norm > 0.0 {
            (q_hat.iter().map(|x| x / norm).collect(), false)
        } else {
            let mass: f64 = active.iter().map(|&b| self.tau[b]).sum();
            (active.iter().map(|&b| self.tau[b] / mass).collect(), true)
        };
        Ok(CbcePrediction {
            round: t,
            active,
            z,
            v,
            q,
            fallback,
        })
    }

    /// `Σ_b q_t^b w_t^b`. `box_weights` must hold an entry for every active
    /// box.
    pub fn combine(
        &self,
        prediction: &CbcePrediction,
        box_weights: &[(usize, ProbabilityVector)],
    ) -> Result<ProbabilityVector> {
        let ws = self.lookup(prediction, box_weights)?;
        let k = ws[0].len();
        let mut w = vec![0.0; k];
        for (q, wb) in prediction.q.iter().zip(&ws) {
            if wb.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: wb.len(),
                });
            }
            for (acc, x) in w.iter_mut().zip(wb.iter()) {
                *acc += q * x;
            }
        }
        ProbabilityVector::from_unnormalized(w)
    }

    /// Accounts round `t` after the losses are revealed.
    pub fn observe(
        &mut self,
        prediction: &CbcePrediction,
        box_weights: &[(usize, ProbabilityVector)],
        l: &LossVector,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if prediction.round != self.round + 1 {
            return Err(Error::InvalidRound(prediction.round));
        }
        let ws = self.lookup(prediction, box_weights)?;
        let box_losses: Vec<f64> = ws
            .iter()
            .map(|wb| wb.expectation(l.as_slice()))
            .collect::<Result<_>>()?;
        let mut meta_regret = Vec::with_capacity(ws.len());
        let mut g = Vec::with_capacity(ws.len());
        for (i, &b) in prediction.active.iter().enumerate() {
            // `Σ_b' q^b' (x_b' − x_b)` rather than `ℓ̂ − x_b`, with rounding
            // noise snapped to an exact tie: fresh boxes play the prior up
            // to an ulp, and the sign of `v` must not hinge on that.
            let r: f64 = prediction
                .q
                .iter()
                .zip(&box_losses)
                .map(|(q, x)| q * (x - box_losses[i]))
                .sum();
            let r = if r.abs() < TIE_TOLERANCE { 0.0 } else { r };
            let gb = if prediction.v[i] > 0.0 { r } else { r.max(0.0) };
            let s = &mut self.sums[b];
            s.sum_g += gb;
            s.wealth += prediction.z[i] * prediction.v[i];
            meta_regret.push(r);
            g.push(gb);
        }
        self.round += 1;
        Ok((meta_regret, g))
    }

    /// `predict`, `combine` and `observe` in one call.
    pub fn step(
        &mut self,
        box_weights: &[(usize, ProbabilityVector)],
        l: &LossVector,
    ) -> Result<CbceStep> {
        let prediction = self.predict()?;
        let weights = self.combine(&prediction, box_weights)?;
        let (meta_regret, g) = self.observe(&prediction, box_weights, l)?;
        Ok(CbceStep {
            prediction,
            weights,
            meta_regret,
            g,
        })
    }

    fn lookup<'a>(
        &self,
        prediction: &CbcePrediction,
        box_weights: &'a [(usize, ProbabilityVector)],
    ) -> Result<Vec<&'a ProbabilityVector>> {
        prediction
            .active
            .iter()
            .map(|&b| {
                box_weights
                    .iter()
                    .find(|(id, _)| *id == b)
                    .map(|(_, w)| w)
                    .ok_or_else(|| {
                        let j = self.schedule.get(b);
                        Error::MissingBoxWeights {
                            start: j.start(),
                            end: j.end(),
                        }
                    })
            })
            .collect()
    }
}

/// Base learner run inside each CBCE box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseLearner {
    Hedge,
    Squint,
}

#[derive(Debug, Clone)]
enum BlackBox {
    Hedge(HedgeState),
    Squint(SquintState),
}

impl BlackBox {
    fn weights(&self) -> ProbabilityVector {
        match self {
            BlackBox::Hedge(h) => h.weights(),
            BlackBox::Squint(s) => s.weights(),
        }
    }

    fn update(&mut self, w: &ProbabilityVector, l: &LossVector) -> Result<()> {
        match self {
            BlackBox::Hedge(h) => h.update(l),
            BlackBox::Squint(s) => s.update(w, l).map(|_| ()),
        }
    }
}

/// Totals for one CBCE box over the rounds it was active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbceBoxSummary {
    pub interval: CoveringInterval,
    pub prior: f64,
    pub rounds: usize,
    /// `R_J^{b_J}(ℳ)`.
    pub meta_regret: f64,
    /// `R_J^k(b_J)` per expert.
    pub box_regret: Vec<f64>,
    /// `V_J^k(b_J)` per expert.
    pub box_variance: Vec<f64>,
}

/// CBCE together with its black boxes.
#[derive(Debug, Clone)]
pub struct Cbce {
    state: CbceState,
    base: BaseLearner,
    prior: ExpertPrior,
    boxes: Vec<Option<BlackBox>>,
    summaries: Vec<CbceBoxSummary>,
    box_updates: u64,
}

/// Outcome of one CBCE round with its boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct CbceRound {
    pub weights: ProbabilityVector,
    pub regret: Vec<f64>,
    pub active: Vec<usize>,
    pub q: Vec<f64>,
    pub fallback: bool,
}

impl Cbce {
    /// Boxes are every covering interval starting by `horizon`; `τ` is the
    /// Jun prior normalized over them.
    pub fn new(horizon: usize, base: BaseLearner, prior: ExpertPrior) -> Result<Self> {
        let schedule = CoveringSchedule::with_scope(horizon, BoxScope::StartWithinHorizon)?;
        let tau = JunPrior::new(&schedule)?.into_weights();
        Self::with_tau(schedule, tau, base, prior)
    }

    pub fn with_tau(
        schedule: CoveringSchedule,
        tau: ProbabilityVector,
        base: BaseLearner,
        prior: ExpertPrior,
    ) -> Result<Self> {
        let k = prior.experts();
        let summaries = schedule
            .boxes()
            .iter()
            .enumerate()
            .map(|(i, j)| CbceBoxSummary {
                interval: *j,
                prior: tau[i],
                rounds: 0,
                meta_regret: 0.0,
                box_regret: vec![0.0; k],
                box_variance: vec![0.0; k],
            })
            .collect();
        let n = schedule.len();
        Ok(Self {
            state: CbceState::new(schedule, tau)?,
            base,
            prior,
            boxes: vec![None; n],
            summaries,
            box_updates: 0,
        })
    }

    pub fn state(&self) -> &CbceState {
        &self.state
    }

    pub fn base(&self) -> BaseLearner {
        self.base
    }

    pub fn summaries(&self) -> &[CbceBoxSummary] {
        &self.summaries
    }

    pub fn into_summaries(self) -> Vec<CbceBoxSummary> {
        self.summaries
    }

    /// Number of (round, active box) pairs processed.
    pub fn box_updates(&self) -> u64 {
        self.box_updates
    }

    fn spawn(&self, j: CoveringInterval) -> Result<BlackBox> {
        Ok(match self.base {
            BaseLearner::Hedge => {
                let k = self.prior.experts();
                let rate = if k < 2 {
                    0.0
                } else {
                    crate::algorithms::hedge_default_rate(j.len(), k)?
                };
                BlackBox::Hedge(HedgeState::new(self.prior.clone(), rate)?)
            }
            BaseLearner::Squint => BlackBox::Squint(SquintState::new(
                LearningRateGrid::build(j.len())?,
                self.prior.clone(),
            )?),
        })
    }

    /// Plays one round against `l`.
    pub fn round(&mut self, l: &LossVector) -> Result<CbceRound> {
        if l.len() != self.prior.experts() {
            return Err(Error::DimensionMismatch {
                expected: self.prior.experts(),
                found: l.len(),
            });
        }
        let prediction = self.state.predict()?;
        let t = prediction.round;
        let mut box_weights = Vec::with_capacity(prediction.active.len());
        for &b in &prediction.active {
            if self.boxes[b].is_none() {
                let j = self.state.schedule().get(b);
                debug_assert_eq!(j.start(), t);
                self.boxes[b] = Some(self.spawn(j)?);
            }
            let w = self.boxes[b].as_ref().expect("spawned above").weights();
            box_weights.push((b, w));
        }
        let weights = self.state.combine(&prediction, &box_weights)?;
        let regret = crate::domain::instantaneous_regret(&weights, l)?;
        let (meta_regret, _) = self.state.observe(&prediction, &box_weights, l)?;
        for (i, (b, wb)) in box_weights.iter().enumerate() {
            let summary = &mut self.summaries[*b];
            summary.rounds += 1;
            summary.meta_regret += meta_regret[i];
            let box_r = crate::domain::instantaneous_regret(wb, l)?;
            for (k, r) in box_r.iter().enumerate() {
                summary.box_regret[k] += r;
                summary.box_variance[k] += r * r;
            }
            let bb = self.boxes[*b].as_mut().expect("active box exists");
            bb.update(wb, l)?;
            if summary.interval.end() == t {
                self.boxes[*b] = None;
            }
        }
        self.box_updates += box_weights.len() as u64;
        Ok(CbceRound {
            weights,
            regret,
            active: prediction.active,
            q: prediction.q,
            fallback: prediction.fallback,
        })
    }
}
