use crate::domain::prob::ProbabilityVector;
use crate::error::{Error, Result};

/// `⌈log2 √T⌉`, computed exactly as the smallest `m` with `4^m ≥ T`.
pub fn ceil_log2_sqrt(horizon: usize) -> u32 {
    let mut m = 0u32;
    let mut pow = 1u128;
    while pow < horizon as u128 {
        pow *= 4;
        m += 1;
    }
    m
}

/// Learning rates `{1/2} ∪ {2^{−i} : i = 1..⌈log2 √T⌉}` with a prior over them.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningRateGrid {
    rates: Vec<f64>,
    prior: ProbabilityVector,
}

impl LearningRateGrid {
    /// Grid for horizon `T` with the uniform prior.
    pub fn build(horizon: usize) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::InvalidHorizon(horizon));
        }
        let levels = ceil_log2_sqrt(horizon).max(1);
        let rates: Vec<f64> = (1..=levels).map(|i| 0.5f64.powi(i as i32)).collect();
        let prior = ProbabilityVector::uniform(rates.len())?;
        Ok(Self { rates, prior })
    }

    /// Arbitrary grid. Rates must lie in `(0, 1/2]` and be strictly decreasing.
    pub fn with_rates(rates: Vec<f64>, prior: ProbabilityVector) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::EmptySupport);
        }
        if prior.len() != rates.len() {
            return Err(Error::DimensionMismatch {
                expected: rates.len(),
                found: prior.len(),
            });
        }
        if rates.iter().any(|&r| !(r > 0.0 && r <= 0.5)) {
            return Err(Error::InvalidRate("grid rates must lie in (0, 1/2]".into()));
        }
        if rates.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidRate(
                "grid rates must be strictly decreasing".into(),
            ));
        }
        Ok(Self { rates, prior })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn prior(&self) -> &ProbabilityVector {
        &self.prior
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn smallest(&self) -> f64 {
        *self.rates.last().expect("grid is nonempty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        assert_eq!(LearningRateGrid::build(1).unwrap().rates(), &[0.5]);
        assert_eq!(LearningRateGrid::build(2).unwrap().rates(), &[0.5]);
        assert_eq!(LearningRateGrid::build(16).unwrap().rates(), &[0.5, 0.25]);
        assert_eq!(
            LearningRateGrid::build(100).unwrap().rates(),
            &[0.5, 0.25, 0.125, 0.0625]
        );
        assert!(LearningRateGrid::build(0).is_err());
    }

    #[test]
    fn ceil_log2_sqrt_matches_float_definition() {
        for t in 2..5000usize {
            let expected = ((t as f64).sqrt().log2()).ceil() as u32;
            assert_eq!(ceil_log2_sqrt(t), expected, "T = {t}");
        }
    }

    #[test]
    fn grid_size_matches_formula() {
        for t in 2..2000usize {
            let g = LearningRateGrid::build(t).unwrap();
            assert_eq!(g.len() as u32, ceil_log2_sqrt(t));
            assert!(g.rates().iter().all(|&r| r <= 0.5));
            assert!((g.prior().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn every_rate_in_range_has_a_grid_point_within_factor_two() {
        for t in [
            1usize, 2, 3, 4, 5, 7, 16, 17, 100, 255, 256, 1000, 4095, 4096,
        ] {
            let g = LearningRateGrid::build(t).unwrap();
            let lo = 1.0 / (2.0 * (t as f64).sqrt());
            assert!(g.smallest() >= lo - 1e-15, "T = {t}");
            if t < 2 {
                continue;
            }
            let steps = 2000;
            for s in 0..=steps {
                let eta = lo + (0.5 - lo) * s as f64 / steps as f64;
                assert!(
                    g.rates().iter().any(|&r| eta <= r && r <= 2.0 * eta),
                    "T = {t}, eta = {eta}"
                );
            }
        }
    }

    #[test]
    fn custom_grid_validation() {
        let p = ProbabilityVector::uniform(2).unwrap();
        assert!(LearningRateGrid::with_rates(vec![0.25, 0.5], p.clone()).is_err());
        assert!(LearningRateGrid::with_rates(vec![0.75, 0.5], p.clone()).is_err());
        assert!(LearningRateGrid::with_rates(vec![0.5, 0.1], p).is_ok());
    }
}
