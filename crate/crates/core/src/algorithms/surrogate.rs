//! Surrogate regret of a sequence of distributions over `(η, k)` against a
//! comparator `Q`, and the comparators used in the bound checks.

use crate::algorithms::ew::EwPosterior;
use crate::domain::{
    kl_divergence, mix_loss, ExpertPrior, ExpertSet, LearningRateGrid, ProbabilityVector,
};
use crate::error::{Error, Result};

/// `S^Q = Σ_t L(f̂_t, P_t) − E_Q[Σ_t f̂_t]`, one mix loss per recorded round.
pub fn surrogate_regret(
    posteriors: &[ProbabilityVector],
    losses: &[Vec<f64>],
    q: &ProbabilityVector,
) -> Result<f64> {
    if posteriors.len() != losses.len() {
        return Err(Error::DimensionMismatch {
            expected: posteriors.len(),
            found: losses.len(),
        });
    }
    let mut mix_total = 0.0;
    let mut totals = vec![0.0; q.len()];
    for (p, f) in posteriors.iter().zip(losses) {
        if p.len() != q.len() || f.len() != q.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                found: p.len().max(f.len()),
            });
        }
        mix_total += mix_loss(f, p)?;
        for (acc, x) in totals.iter_mut().zip(f) {
            *acc += x;
        }
    }
    Ok(mix_total - q.expectation(&totals)?)
}

/// The same quantity for an EW posterior with rate 1, through the identity
/// `Σ_t L(f̂_t, P_t) = −ln Z_{T+1}`.
pub fn surrogate_regret_telescoped(ew: &EwPosterior, q: &ProbabilityVector) -> Result<f64> {
    if q.len() != ew.len() {
        return Err(Error::DimensionMismatch {
            expected: ew.len(),
            found: q.len(),
        });
    }
    if (ew.rate() - 1.0).abs() > 0.0 {
        return Err(Error::InvalidRate(format!(
            "telescoping needs EW rate 1, got {}",
            ew.rate()
        )));
    }
    Ok(-ew.log_normalizer() - q.expectation(ew.cumulative_losses())?)
}

/// `Q = δ_η × π(·|𝒦)` on the grid × experts support, indexed
/// `[rate * K + expert]`.
pub fn comparator(
    grid: &LearningRateGrid,
    prior: &ExpertPrior,
    rate_index: usize,
    set: &ExpertSet,
) -> Result<ProbabilityVector> {
    if rate_index >= grid.len() {
        return Err(Error::SupportViolation { index: rate_index });
    }
    let k = prior.experts();
    let cond = prior.conditional(set)?;
    let mut q = vec![0.0; grid.len() * k];
    q[rate_index * k..(rate_index + 1) * k].copy_from_slice(cond.as_slice());
    ProbabilityVector::new(q)
}

/// `KL(Q ‖ γ×π)` for the comparator above, which is
/// `−ln γ(η) − ln π(𝒦)`.
pub fn comparator_kl(
    grid: &LearningRateGrid,
    prior: &ExpertPrior,
    rate_index: usize,
    set: &ExpertSet,
) -> Result<f64> {
    if rate_index >= grid.len() {
        return Err(Error::SupportViolation { index: rate_index });
    }
    let mass = prior.mass(set);
    if mass <= 0.0 {
        return Err(Error::ZeroPriorMass);
    }
    Ok(-grid.prior()[rate_index].ln() - mass.ln())
}

/// `KL(Q ‖ γ×π)` evaluated directly, for cross-checking [`comparator_kl`].
pub fn comparator_kl_direct(
    grid: &LearningRateGrid,
    prior: &ExpertPrior,
    q: &ProbabilityVector,
) -> Result<f64> {
    let joint: Vec<f64> = grid
        .prior()
        .iter()
        .flat_map(|g| prior.distribution().iter().map(move |p| g * p))
        .collect();
    kl_divergence(q, &ProbabilityVector::new(joint)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::squint::SquintState;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_history_is_zero() {
        let q = ProbabilityVector::uniform(3).unwrap();
        assert_eq!(surrogate_regret(&[], &[], &q).unwrap(), 0.0);
    }

    #[test]
    fn one_round_against_own_posterior_is_nonpositive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.gen_range(1..8);
            let p = ProbabilityVector::from_unnormalized(
                (0..n).map(|_| rng.gen_range(0.01..1.0)).collect(),
            )
            .unwrap();
            let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.25..0.75)).collect();
            let s = surrogate_regret(std::slice::from_ref(&p), &[f], &p).unwrap();
            assert!(s <= 1e-12);
        }
    }

    #[test]
    fn direct_and_telescoped_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let k = rng.gen_range(1..5);
            let grid = LearningRateGrid::build(rng.gen_range(1..300)).unwrap();
            let prior = ExpertPrior::uniform(k).unwrap();
            let mut s = SquintState::new(grid.clone(), prior.clone()).unwrap();
            let mut posteriors = Vec::new();
            let mut losses = Vec::new();
            for _ in 0..3 {
                let r: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                posteriors.push(s.posterior());
                losses.push(s.surrogate_losses(&r));
                s.update_with_regret(&r).unwrap();
            }
            let set = ExpertSet::singleton(rng.gen_range(0..k));
            let q = comparator(&grid, &prior, rng.gen_range(0..grid.len()), &set).unwrap();
            let direct = surrogate_regret(&posteriors, &losses, &q).unwrap();
            let mut ew =
                EwPosterior::new(&ProbabilityVector::uniform(grid.len() * k).unwrap(), 1.0)
                    .unwrap();
            for f in &losses {
                ew.update(f).unwrap();
            }
            let telescoped = surrogate_regret_telescoped(&ew, &q).unwrap();
            assert_abs_diff_eq!(direct, telescoped, epsilon = 1e-12);
        }
    }

    #[test]
    fn comparator_kl_matches_direct() {
        let grid = LearningRateGrid::build(100).unwrap();
        let prior = ExpertPrior::uniform(4).unwrap();
        let set = ExpertSet::new(vec![0, 2], 4).unwrap();
        for i in 0..grid.len() {
            let q = comparator(&grid, &prior, i, &set).unwrap();
            assert_abs_diff_eq!(
                comparator_kl(&grid, &prior, i, &set).unwrap(),
                comparator_kl_direct(&grid, &prior, &q).unwrap(),
                epsilon = 1e-12
            );
        }
        assert_abs_diff_eq!(
            comparator_kl(&grid, &prior, 0, &set).unwrap(),
            4f64.ln() + 2f64.ln(),
            epsilon = 1e-12
        );
        assert!(comparator(&grid, &prior, 9, &set).is_err());
    }
}
