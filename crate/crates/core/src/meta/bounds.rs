//! Interval regret bounds for the meta-algorithms.

use std::f64::consts::SQRT_2;

use crate::algorithms::bounds::check_mass;
use crate::covering::CoveringInterval;
use crate::domain::{ceil_log2_sqrt, Interval};
use crate::error::{Error, Result};

pub use crate::algorithms::bounds::squint_bound as squintce_bound;

/// CBCE's regret against `b_J` on `J`: `√(|J| (7 ln J2 + 5))`.
pub fn cbce_meta_bound(j: CoveringInterval) -> f64 {
    cbce_root(j.len(), j.end())
}

fn cbce_root(len: usize, end: usize) -> f64 {
    (len as f64 * (7.0 * (end as f64).ln() + 5.0)).sqrt()
}

/// CBCE with Hedge boxes:
/// `(2√2/(√2−1)) √(|I|(7 ln I2 + 5)) + (2/(√2−1)) √(|I| ln K)`.
pub fn cbce_hedge_bound(interval: Interval, experts: usize) -> f64 {
    let len = interval.len() as f64;
    2.0 * SQRT_2 / (SQRT_2 - 1.0) * cbce_root(interval.len(), interval.end())
        + 2.0 / (SQRT_2 - 1.0) * (len * (experts as f64).ln()).sqrt()
}

fn check(interval: Interval, horizon: usize, prior_mass: f64) -> Result<()> {
    if horizon < 1 {
        return Err(Error::InvalidHorizon(horizon));
    }
    if interval.end() > horizon {
        return Err(Error::InvalidInterval {
            start: interval.start(),
            end: interval.end(),
        });
    }
    check_mass(prior_mass)
}

fn clamp_product(interval: Interval, horizon: usize, meta_term: f64, prior_mass: f64) -> f64 {
    let pieces = 2.0 * ((interval.len() + 2) as f64).log2();
    let log_grid = (ceil_log2_sqrt(horizon) as f64).ln();
    (pieces * (meta_term + log_grid - prior_mass.ln())).max(1.0)
}

/// `Â` with the exact `ln |B|`.
pub fn bound_a_hat(
    interval: Interval,
    horizon: usize,
    box_count: usize,
    prior_mass: f64,
) -> Result<f64> {
    check(interval, horizon, prior_mass)?;
    if box_count < 1 {
        return Err(Error::EmptySupport);
    }
    Ok(clamp_product(
        interval,
        horizon,
        (box_count as f64).ln(),
        prior_mass,
    ))
}

/// `Â` with `ln(2T)` in place of `ln |B|`.
pub fn bound_a_hat_ln2t(interval: Interval, horizon: usize, prior_mass: f64) -> Result<f64> {
    check(interval, horizon, prior_mass)?;
    Ok(clamp_product(
        interval,
        horizon,
        (2.0 * horizon as f64).ln(),
        prior_mass,
    ))
}

/// `Ã`, with `1/2 + 3 ln I2` in place of `ln |B|`.
pub fn bound_a_tilde(interval: Interval, horizon: usize, prior_mass: f64) -> Result<f64> {
    check(interval, horizon, prior_mass)?;
    Ok(clamp_product(
        interval,
        horizon,
        0.5 + 3.0 * (interval.end() as f64).ln(),
        prior_mass,
    ))
}
