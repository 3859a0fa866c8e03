use crate::domain::{log_sum_exp, ProbabilityVector};
use crate::error::{Error, Result};

/// Exponential Weights over a finite support.
///
/// Holds `ln ρ(θ)` and the cumulative losses `Σ_s g_s(θ)`; the posterior
/// `P_{t+1}(θ) ∝ ρ(θ) e^{−η Σ g_s(θ)}` and its normalizer `Z_{t+1}` are
/// derived on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct EwPosterior {
    log_prior: Vec<f64>,
    cumulative: Vec<f64>,
    rate: f64,
}

impl EwPosterior {
    pub fn new(prior: &ProbabilityVector, rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidRate(format!("EW rate {rate}")));
        }
        Ok(Self {
            log_prior: prior.log_weights(),
            cumulative: vec![0.0; prior.len()],
            rate,
        })
    }

    pub fn len(&self) -> usize {
        self.log_prior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_prior.is_empty()
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn log_prior(&self) -> &[f64] {
        &self.log_prior
    }

    pub fn cumulative_losses(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn update(&mut self, losses: &[f64]) -> Result<()> {
        if losses.len() != self.cumulative.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cumulative.len(),
                found: losses.len(),
            });
        }
        if losses.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidSpec("EW losses must be finite".into()));
        }
        for (c, g) in self.cumulative.iter_mut().zip(losses) {
            *c += g;
        }
        Ok(())
    }

    /// Unnormalized `ln ρ(θ) − η Σ g_s(θ)`.
    pub fn log_weights(&self) -> Vec<f64> {
        self.log_prior
            .iter()
            .zip(&self.cumulative)
            .map(|(lp, c)| lp - self.rate * c)
            .collect()
    }

    /// `ln Z_{t+1}`.
    pub fn log_normalizer(&self) -> f64 {
        log_sum_exp(&self.log_weights())
    }

    pub fn posterior(&self) -> ProbabilityVector {
        ProbabilityVector::from_log_weights(&self.log_weights())
            .expect("EW posterior has positive prior mass")
    }
}
