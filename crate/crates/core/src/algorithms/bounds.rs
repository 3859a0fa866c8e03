//! Closed-form regret bounds for the single-interval learners.

use crate::domain::ceil_log2_sqrt;
use crate::error::{Error, Result};

/// Hedge's tuned rate `√((8/T) ln K)`.
pub fn hedge_default_rate(horizon: usize, experts: usize) -> Result<f64> {
    if horizon < 1 {
        return Err(Error::InvalidHorizon(horizon));
    }
    if experts < 2 {
        return Err(Error::TooFewExperts {
            needed: 2,
            got: experts,
        });
    }
    Ok((8.0 / horizon as f64 * (experts as f64).ln()).sqrt())
}

/// `√((T/2) ln K)`.
pub fn hedge_bound(horizon: usize, experts: usize) -> f64 {
    (horizon as f64 / 2.0 * (experts as f64).ln()).sqrt()
}

/// `A_T^𝒦 = (ln⌈log2 √T⌉ − ln π(𝒦)) ∨ 1`.
///
/// For `T = 1` the first logarithm is `ln 0 = −∞` and the clamp gives 1.
pub fn bound_a(horizon: usize, prior_mass: f64) -> Result<f64> {
    if horizon < 1 {
        return Err(Error::InvalidHorizon(horizon));
    }
    check_mass(prior_mass)?;
    let log_grid = (ceil_log2_sqrt(horizon) as f64).ln();
    Ok((log_grid - prior_mass.ln()).max(1.0))
}

/// `2√(2VA) + 4A`.
pub fn squint_bound(variance: f64, a: f64) -> f64 {
    2.0 * (2.0 * variance.max(0.0) * a).sqrt() + 4.0 * a
}

pub(crate) fn check_mass(prior_mass: f64) -> Result<()> {
    if !(prior_mass > 0.0 && prior_mass <= 1.0 + 1e-12) {
        return Err(Error::ZeroPriorMass);
    }
    Ok(())
}
