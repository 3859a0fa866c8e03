//! Squint over a discrete learning-rate grid.
//!
//! The state is kept twice: as per-expert `(R_t^k, V_t^k)` and as an
//! Exponential Weights posterior over `(η, k)` whose cumulative losses are
//! `F_t(η, k) = Σ_s f̂_s(η, k)`. Weights come from the posterior (marginalize
//! `η` with weight `η`); [`SquintState::weights_from_regret`] evaluates the
//! `e^{ηR − η²V}` form directly and must agree.

use crate::algorithms::ew::EwPosterior;
use crate::domain::{
    instantaneous_regret, log_sum_exp, mix_loss, surrogate_loss, ExpertPrior, LearningRateGrid,
    LossVector, ProbabilityVector,
};
use crate::error::{Error, Result};

/// Tolerance on `|F − (−ηR + η²V)|`.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-9;

/// Outcome of one Squint update.
#[derive(Debug, Clone, PartialEq)]
pub struct SquintStep {
    /// `r_t^k`.
    pub regret: Vec<f64>,
    /// `L(f̂_t, P_t)`, the mix loss of the surrogate losses under the
    /// posterior that produced this round's weights.
    pub mix_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquintState {
    grid: LearningRateGrid,
    prior: ExpertPrior,
    regret: Vec<f64>,
    variance: Vec<f64>,
    // Indexed [rate * K + expert].
    posterior: EwPosterior,
    rounds: usize,
}

impl SquintState {
    /// Squint with `η_EW = 1`.
    pub fn new(grid: LearningRateGrid, prior: ExpertPrior) -> Result<Self> {
        Self::with_ew_rate(grid, prior, 1.0)
    }

    pub fn with_ew_rate(grid: LearningRateGrid, prior: ExpertPrior, ew_rate: f64) -> Result<Self> {
        let k = prior.experts();
        let joint: Vec<f64> = grid
            .prior()
            .iter()
            .flat_map(|g| prior.distribution().iter().map(move |p| g * p))
            .collect();
        let joint = ProbabilityVector::from_unnormalized(joint)?;
        Ok(Self {
            posterior: EwPosterior::new(&joint, ew_rate)?,
            grid,
            prior,
            regret: vec![0.0; k],
            variance: vec![0.0; k],
            rounds: 0,
        })
    }

    pub fn experts(&self) -> usize {
        self.prior.experts()
    }

    pub fn grid(&self) -> &LearningRateGrid {
        &self.grid
    }

    pub fn prior(&self) -> &ExpertPrior {
        &self.prior
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// `R_t^k`.
    pub fn regret(&self) -> &[f64] {
        &self.regret
    }

    /// `V_t^k`.
    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    /// `F_t(η, k)` indexed `[rate * K + expert]`.
    pub fn surrogate_totals(&self) -> &[f64] {
        self.posterior.cumulative_losses()
    }

    /// EW posterior `P_{t+1}` over `(η, k)`.
    pub fn posterior(&self) -> ProbabilityVector {
        self.posterior.posterior()
    }

    /// Unnormalized log-posterior `ln γ(η) + ln π(k) − F(η, k)`.
    pub fn log_posterior_weights(&self) -> Vec<f64> {
        self.posterior.log_weights()
    }

    /// `ln Z_{t+1} = ln E_{γπ}[e^{−F}]`.
    pub fn log_normalizer(&self) -> f64 {
        self.posterior.log_normalizer()
    }

    /// Weights from the posterior: `w = E_P[η e_k] / E_P[η]`.
    pub fn weights(&self) -> ProbabilityVector {
        marginalize(
            &self.posterior.log_weights(),
            self.grid.rates(),
            self.experts(),
        )
    }

    /// Weights from `E_{γπ}[e^{ηR − η²V} η e_k] / E_{γπ}[e^{ηR − η²V} η]`.
    pub fn weights_from_regret(&self) -> ProbabilityVector {
        let k = self.experts();
        let ew = self.posterior.rate();
        let mut per_expert = Vec::with_capacity(k);
        for e in 0..k {
            let terms: Vec<f64> = self
                .grid
                .rates()
                .iter()
                .zip(self.grid.prior().iter())
                .map(|(&eta, g)| {
                    g.ln()
                        + self.prior.distribution()[e].ln()
                        + ew * (eta * self.regret[e] - eta * eta * self.variance[e])
                        + eta.ln()
                })
                .collect();
            per_expert.push(log_sum_exp(&terms));
        }
        ProbabilityVector::from_log_weights(&per_expert).expect("prior has positive mass")
    }

    /// `f̂_t(η, k)` for every grid point, indexed like the posterior.
    pub fn surrogate_losses(&self, r: &[f64]) -> Vec<f64> {
        self.grid
            .rates()
            .iter()
            .flat_map(|&eta| r.iter().map(move |&rk| surrogate_loss(eta, rk)))
            .collect()
    }

    /// Observe the losses of a round in which the learner played `w`.
    ///
    /// `w` must be the vector returned by [`weights`](Self::weights) for this
    /// round.
    pub fn update(&mut self, w: &ProbabilityVector, l: &LossVector) -> Result<SquintStep> {
        if l.len() != self.experts() {
            return Err(Error::DimensionMismatch {
                expected: self.experts(),
                found: l.len(),
            });
        }
        let r = instantaneous_regret(w, l)?;
        let mix = self.update_with_regret(&r)?;
        Ok(SquintStep {
            regret: r,
            mix_loss: mix,
        })
    }

    /// Feed externally computed instantaneous regrets (the black-box use in
    /// Squint-CE, where the regrets are those of the combined learner).
    /// Returns `L(f̂_t, P_t)` under the posterior held before the update.
    pub fn update_with_regret(&mut self, r: &[f64]) -> Result<f64> {
        if r.len() != self.experts() {
            return Err(Error::DimensionMismatch {
                expected: self.experts(),
                found: r.len(),
            });
        }
        let f = self.surrogate_losses(r);
        let mix = mix_loss(&f, &self.posterior.posterior())?;
        self.posterior.update(&f)?;
        for (k, &rk) in r.iter().enumerate() {
            self.regret[k] += rk;
            self.variance[k] += rk * rk;
        }
        self.rounds += 1;
        debug_assert!(
            self.consistency_gap() <= CONSISTENCY_TOLERANCE,
            "F drifted from (R, V): {}",
            self.consistency_gap()
        );
        Ok(mix)
    }

    /// `max |F(η,k) − (−ηR^k + η²V^k)|`.
    pub fn consistency_gap(&self) -> f64 {
        let k = self.experts();
        let f = self.posterior.cumulative_losses();
        let mut gap = 0.0f64;
        for (i, &eta) in self.grid.rates().iter().enumerate() {
            for e in 0..k {
                let expected = -eta * self.regret[e] + eta * eta * self.variance[e];
                gap = gap.max((f[i * k + e] - expected).abs());
            }
        }
        gap
    }
}

/// `E_P[η e_k] / E_P[η]` for a distribution over `(η, k)` given by
/// unnormalized log-weights indexed `[rate * K + expert]`.
pub fn marginalize(log_weights: &[f64], rates: &[f64], experts: usize) -> ProbabilityVector {
    let per_expert: Vec<f64> = (0..experts)
        .map(|e| {
            let terms: Vec<f64> = rates
                .iter()
                .enumerate()
                .map(|(i, eta)| log_weights[i * experts + e] + eta.ln())
                .collect();
            log_sum_exp(&terms)
        })
        .collect();
    ProbabilityVector::from_log_weights(&per_expert).expect("distribution has positive mass")
}
