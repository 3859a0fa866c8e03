//! Squint-CE: Exponential Weights over Squint black boxes, each charged its
//! own mix loss while active and the learner's mix loss `ĝ_t` while asleep.
//!
//! Instead of `G^b` the state keeps `D^b = G^b − Ĝ`, where `Ĝ = Σ_s ĝ_s`.
//! `D^b` only moves while `b` is active, so boxes that have not started or
//! have finished cost nothing per round, and `q̃^b = τ(b) e^{−D^b}` is already
//! normalized.

use serde::{Deserialize, Serialize};

use crate::algorithms::{marginalize, SquintState};
use crate::covering::{CoveringInterval, CoveringSchedule};
use crate::domain::{
    instantaneous_regret, log_sum_exp, ExpertPrior, LearningRateGrid, LossVector, ProbabilityVector,
};
use crate::error::{Error, Result};
use crate::meta::jun::JunPrior;

/// Tolerance for the closed-form weights against the two-stage mixture.
pub const ROUTE_TOLERANCE: f64 = 1e-9;

/// Prior `τ` over the boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoxPrior {
    Uniform,
    Jun,
}

/// Totals for one box over its interval (or the part of it played so far).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquintCeBoxSummary {
    pub interval: CoveringInterval,
    pub prior: f64,
    pub rounds: usize,
    /// `Σ_{t∈J} g_t(b_J)`.
    pub box_mix_loss: f64,
    /// `Σ_{t∈J} ĝ_t`.
    pub learner_mix_loss: f64,
}

impl SquintCeBoxSummary {
    /// `S_J^{b_J}(ℳ) = Σ_{t∈J} (ĝ_t − g_t(b_J))`.
    pub fn meta_surrogate_regret(&self) -> f64 {
        self.learner_mix_loss - self.box_mix_loss
    }
}

/// Outcome of one Squint-CE round.
#[derive(Debug, Clone, PartialEq)]
pub struct SquintCeRound {
    pub weights: ProbabilityVector,
    pub regret: Vec<f64>,
    /// `ĝ_t` computed with `q_t`.
    pub ghat: f64,
    /// `ĝ_t` computed with the unconditioned `q̃_t` over all boxes, when
    /// requested.
    pub ghat_full: Option<f64>,
    /// Active box ids, sorted by level.
    pub active: Vec<usize>,
    pub q: Vec<f64>,
    /// `g_t(b)` for the active boxes.
    pub box_losses: Vec<f64>,
    /// Max abs difference between the closed-form and two-stage weights.
    pub route_gap: f64,
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct SquintCeState {
    schedule: CoveringSchedule,
    tau: ProbabilityVector,
    log_tau: Vec<f64>,
    grid: LearningRateGrid,
    prior: ExpertPrior,
    ew_rate: f64,
    boxes: Vec<Option<SquintState>>,
    d: Vec<f64>,
    ghat_total: f64,
    summaries: Vec<SquintCeBoxSummary>,
    round: usize,
    box_updates: u64,
    check_full_mixture: bool,
}

impl SquintCeState {
    /// Boxes `B = {J : J2 ≤ T}`, the grid built from `T`, `η_EW = 1`.
    pub fn new(horizon: usize, prior: ExpertPrior, box_prior: BoxPrior) -> Result<Self> {
        let schedule = CoveringSchedule::enumerate_boxes(horizon)?;
        let tau = match box_prior {
            BoxPrior::Uniform => ProbabilityVector::uniform(schedule.len())?,
            BoxPrior::Jun => JunPrior::new(&schedule)?.into_weights(),
        };
        Self::with_parts(schedule, tau, LearningRateGrid::build(horizon)?, prior, 1.0)
    }

    pub fn with_parts(
        schedule: CoveringSchedule,
        tau: ProbabilityVector,
        grid: LearningRateGrid,
        prior: ExpertPrior,
        ew_rate: f64,
    ) -> Result<Self> {
        if tau.len() != schedule.len() {
            return Err(Error::DimensionMismatch {
                expected: schedule.len(),
                found: tau.len(),
            });
        }
        let summaries = schedule
            .boxes()
            .iter()
            .enumerate()
            .map(|(i, j)| SquintCeBoxSummary {
                interval: *j,
                prior: tau[i],
                rounds: 0,
                box_mix_loss: 0.0,
                learner_mix_loss: 0.0,
            })
            .collect();
        let n = schedule.len();
        Ok(Self {
            log_tau: tau.log_weights(),
            schedule,
            tau,
            grid,
            prior,
            ew_rate,
            boxes: vec![None; n],
            d: vec![0.0; n],
            ghat_total: 0.0,
            summaries,
            round: 0,
            box_updates: 0,
            check_full_mixture: true,
        })
    }

    /// Sets `η_EW` for the boxes. Only allowed before the first round.
    pub fn set_ew_rate(&mut self, rate: f64) -> Result<()> {
        if self.round > 0 {
            return Err(Error::InvalidRound(self.round));
        }
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidRate(format!("EW rate {rate}")));
        }
        self.ew_rate = rate;
        Ok(())
    }

    /// Whether each round also evaluates `ĝ_t` under `q̃_t` over all of `B`
    /// (costs `O(|B|)` per round).
    pub fn set_full_mixture_check(&mut self, on: bool) {
        self.check_full_mixture = on;
    }

    pub fn schedule(&self) -> &CoveringSchedule {
        &self.schedule
    }

    pub fn tau(&self) -> &ProbabilityVector {
        &self.tau
    }

    pub fn grid(&self) -> &LearningRateGrid {
        &self.grid
    }

    pub fn prior(&self) -> &ExpertPrior {
        &self.prior
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn box_updates(&self) -> u64 {
        self.box_updates
    }

    pub fn summaries(&self) -> &[SquintCeBoxSummary] {
        &self.summaries
    }

    pub fn into_summaries(self) -> Vec<SquintCeBoxSummary> {
        self.summaries
    }

    /// `G_t^b`.
    pub fn cumulative_meta_loss(&self, b: usize) -> f64 {
        self.d[b] + self.ghat_total
    }

    /// `q̃_{t+1}` over all of `B`.
    pub fn q_tilde(&self) -> ProbabilityVector {
        let lw: Vec<f64> = self
            .log_tau
            .iter()
            .zip(&self.d)
            .map(|(a, d)| a - d)
            .collect();
        ProbabilityVector::from_log_weights(&lw).expect("τ has positive mass")
    }

    fn activate(&mut self, t: usize) -> Result<Vec<usize>> {
        let active = self.schedule.active(t)?;
        for &b in &active {
            if self.boxes[b].is_none() {
                debug_assert_eq!(self.schedule.get(b).start(), t);
                self.boxes[b] = Some(SquintState::with_ew_rate(
                    self.grid.clone(),
                    self.prior.clone(),
                    self.ew_rate,
                )?);
            }
        }
        Ok(active)
    }

    fn conditional(&self, active: &[usize]) -> (Vec<f64>, bool) {
        let lw: Vec<f64> = active
            .iter()
            .map(|&b| self.log_tau[b] - self.d[b])
            .collect();
        let norm = log_sum_exp(&lw);
        if norm.is_finite() {
            (lw.iter().map(|x| (x - norm).exp()).collect(), false)
        } else {
            let mass: f64 = active.iter().map(|&b| self.tau[b]).sum();
            (active.iter().map(|&b| self.tau[b] / mass).collect(), true)
        }
    }

    fn active_box(&self, b: usize) -> &SquintState {
        self.boxes[b]
            .as_ref()
            .expect("active boxes are instantiated")
    }

    /// `w_t` through `P_t^{ℳ(𝓑)} = E_{q_t}[P_t^b]`, then marginalizing `η`.
    fn two_stage(&self, active: &[usize], q: &[f64]) -> ProbabilityVector {
        let n = self.grid.len() * self.prior.experts();
        let mut terms = vec![Vec::with_capacity(active.len()); n];
        for (&b, &qb) in active.iter().zip(q) {
            if qb <= 0.0 {
                continue;
            }
            let s = self.active_box(b);
            let lw = s.log_posterior_weights();
            let z = s.log_normalizer();
            for (slot, x) in terms.iter_mut().zip(&lw) {
                slot.push(qb.ln() + x - z);
            }
        }
        let mixture: Vec<f64> = terms.iter().map(|t| log_sum_exp(t)).collect();
        marginalize(&mixture, self.grid.rates(), self.prior.experts())
    }

    /// Closed-form `w_t` from `(G, R, V)`. With `normalized = true` every box
    /// carries the factor `e^{Σ_{s=J1}^{t−1} g_s(b)}` that undoes its
    /// posterior normalizer; with `false` the factor is dropped.
    fn closed_form(&self, active: &[usize], normalized: bool) -> ProbabilityVector {
        let k = self.prior.experts();
        let rates = self.grid.rates();
        let log_gamma = self.grid.prior().log_weights();
        let log_pi = self.prior.distribution().log_weights();
        let mut per_expert = vec![Vec::new(); k];
        for &b in active {
            let s = self.active_box(b);
            // Ĝ is shared by every box and cancels.
            let mut base = self.log_tau[b] - self.d[b];
            if normalized {
                base += self.summaries[b].box_mix_loss;
            }
            for (i, &eta) in rates.iter().enumerate() {
                for e in 0..k {
                    let x = base
                        + log_gamma[i]
                        + log_pi[e]
                        + self.ew_rate * (eta * s.regret()[e] - eta * eta * s.variance()[e])
                        + eta.ln();
                    per_expert[e].push(x);
                }
            }
        }
        let lw: Vec<f64> = per_expert.iter().map(|t| log_sum_exp(t)).collect();
        ProbabilityVector::from_log_weights(&lw).expect("active boxes have positive mass")
    }

    /// The weight formula with the box normalizers left out, evaluated at the
    /// current state. Kept for comparison with the mixture; it differs once
    /// boxes of different ages are active together.
    pub fn unnormalized_closed_form(&self) -> Result<ProbabilityVector> {
        let active = self.schedule.active(self.round + 1)?;
        if active.iter().any(|&b| self.boxes[b].is_none()) {
            let mut copy = self.clone();
            let active = copy.activate(self.round + 1)?;
            return Ok(copy.closed_form(&active, false));
        }
        Ok(self.closed_form(&active, false))
    }

    /// Weights for the next round by both routes, without advancing.
    pub fn peek_weights(&self) -> Result<(ProbabilityVector, ProbabilityVector)> {
        let mut copy = self.clone();
        let active = copy.activate(self.round + 1)?;
        let (q, _) = copy.conditional(&active);
        Ok((copy.two_stage(&active, &q), copy.closed_form(&active, true)))
    }

    /// `(−ln E_{q_t}[e^{−g}], −ln E_{q̃_t}[e^{−g}])` where `g` holds the
    /// active boxes' losses and every other box is charged the first value.
    pub fn learner_mixloss_equivalence(
        &self,
        active: &[usize],
        q: &[f64],
        g: &[f64],
    ) -> (f64, f64) {
        let via_q = mix_over(q, g);
        let mut losses = vec![via_q; self.schedule.len()];
        for (&b, &gb) in active.iter().zip(g) {
            losses[b] = gb;
        }
        let lw: Vec<f64> = self
            .log_tau
            .iter()
            .zip(&self.d)
            .map(|(a, d)| a - d)
            .collect();
        let norm = log_sum_exp(&lw);
        let terms: Vec<f64> = lw
            .iter()
            .zip(&losses)
            .map(|(x, gb)| x - norm - gb)
            .collect();
        (via_q, -log_sum_exp(&terms))
    }

    /// Plays one round against `l`.
    pub fn step(&mut self, l: &LossVector) -> Result<SquintCeRound> {
        let k = self.prior.experts();
        if l.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: l.len(),
            });
        }
        let t = self.round + 1;
        let active = self.activate(t)?;
        let (q, fallback) = self.conditional(&active);

        let weights = self.two_stage(&active, &q);
        let route_gap = if self.ew_rate == 1.0 && !fallback {
            let closed = self.closed_form(&active, true);
            let gap = weights.max_abs_diff(&closed);
            if gap > ROUTE_TOLERANCE || gap.is_nan() {
                return Err(Error::RouteDisagreement {
                    gap,
                    tolerance: ROUTE_TOLERANCE,
                });
            }
            gap
        } else {
            0.0
        };

        let regret = instantaneous_regret(&weights, l)?;
        let mut box_losses = Vec::with_capacity(active.len());
        for &b in &active {
            let s = self.boxes[b]
                .as_mut()
                .expect("active boxes are instantiated");
            box_losses.push(s.update_with_regret(&regret)?);
        }
        let (ghat, ghat_full) = if self.check_full_mixture {
            let (a, b) = self.learner_mixloss_equivalence(&active, &q, &box_losses);
            (a, Some(b))
        } else {
            (mix_over(&q, &box_losses), None)
        };

        for (&b, &gb) in active.iter().zip(&box_losses) {
            self.d[b] += gb - ghat;
            let summary = &mut self.summaries[b];
            summary.rounds += 1;
            summary.box_mix_loss += gb;
            summary.learner_mix_loss += ghat;
            if summary.interval.end() == t {
                self.boxes[b] = None;
            }
        }
        self.ghat_total += ghat;
        self.box_updates += active.len() as u64;
        self.round = t;

        Ok(SquintCeRound {
            weights,
            regret,
            ghat,
            ghat_full,
            active,
            q,
            box_losses,
            route_gap,
            fallback,
        })
    }
}

/// `−ln Σ_b q_b e^{−g_b}`; zero-weight boxes drop out.
fn mix_over(q: &[f64], g: &[f64]) -> f64 {
    let terms: Vec<f64> = q.iter().zip(g).map(|(qb, gb)| qb.ln() - gb).collect();
    -log_sum_exp(&terms)
}
