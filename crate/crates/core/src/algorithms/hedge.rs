use crate::algorithms::bounds::hedge_default_rate;
use crate::domain::{ExpertPrior, LossVector, ProbabilityVector};
use crate::error::{Error, Result};

/// Hedge: `w_{t+1}^k ∝ π(k) e^{−η Σ_{s≤t} l_s^k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeState {
    rate: f64,
    prior: ExpertPrior,
    cumulative: Vec<f64>,
    rounds: usize,
}

impl HedgeState {
    pub fn new(prior: ExpertPrior, rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidRate(format!("Hedge rate {rate}")));
        }
        let k = prior.experts();
        Ok(Self {
            rate,
            prior,
            cumulative: vec![0.0; k],
            rounds: 0,
        })
    }

    /// Uniform prior and the tuned rate for `horizon`. With a single expert the
    /// rate is irrelevant and set to zero.
    pub fn for_horizon(horizon: usize, experts: usize) -> Result<Self> {
        let rate = if experts < 2 {
            0.0
        } else {
            hedge_default_rate(horizon, experts)?
        };
        Self::new(ExpertPrior::uniform(experts)?, rate)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn prior(&self) -> &ExpertPrior {
        &self.prior
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn cumulative_losses(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn weights(&self) -> ProbabilityVector {
        let lw: Vec<f64> = self
            .prior
            .distribution()
            .iter()
            .zip(&self.cumulative)
            .map(|(p, l)| p.ln() - self.rate * l)
            .collect();
        ProbabilityVector::from_log_weights(&lw).expect("prior has positive mass")
    }

    pub fn update(&mut self, l: &LossVector) -> Result<()> {
        if l.len() != self.cumulative.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cumulative.len(),
                found: l.len(),
            });
        }
        for (c, x) in self.cumulative.iter_mut().zip(l.as_slice()) {
            *c += x;
        }
        self.rounds += 1;
        Ok(())
    }
}
