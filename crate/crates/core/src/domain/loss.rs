use serde::{Deserialize, Serialize};

use crate::domain::prob::ProbabilityVector;
use crate::error::{Error, Result};

/// Losses of the K experts in one round, each in `[0, 1]`.
///
/// Out-of-range values are rejected, never clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewExperts { needed: 1, got: 0 });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::LossOutOfRange { index, value });
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for LossVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        LossVector::new(v)
    }
}

impl From<LossVector> for Vec<f64> {
    fn from(l: LossVector) -> Self {
        l.0
    }
}

impl std::ops::Index<usize> for LossVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `r^k = w·l − l^k` for every expert.
pub fn instantaneous_regret(w: &ProbabilityVector, l: &LossVector) -> Result<Vec<f64>> {
    let learner = w.expectation(l.as_slice())?;
    Ok(l.as_slice().iter().map(|lk| learner - lk).collect())
}

/// `f̂(η, r) = −ηr + η²r²`.
#[inline]
pub fn surrogate_loss(eta: f64, r: f64) -> f64 {
    -eta * r + eta * eta * r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn regret_examples() {
        let l = LossVector::new(vec![0.0, 1.0]).unwrap();
        let w = ProbabilityVector::point_mass(2, 0).unwrap();
        assert_eq!(instantaneous_regret(&w, &l).unwrap(), vec![0.0, -1.0]);

        let w = ProbabilityVector::uniform(2).unwrap();
        assert_eq!(instantaneous_regret(&w, &l).unwrap(), vec![0.5, -0.5]);

        let w = ProbabilityVector::new(vec![0.25, 0.75]).unwrap();
        let l = LossVector::new(vec![0.2, 0.6]).unwrap();
        let r = instantaneous_regret(&w, &l).unwrap();
        assert_abs_diff_eq!(r[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], -0.1, epsilon = 1e-15);
    }

    #[test]
    fn regret_errors() {
        let w = ProbabilityVector::uniform(3).unwrap();
        let l = LossVector::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            instantaneous_regret(&w, &l),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            LossVector::new(vec![0.5, 1.5]),
            Err(Error::LossOutOfRange { index: 1, .. })
        ));
        assert!(LossVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn surrogate_examples() {
        assert_eq!(surrogate_loss(0.5, 1.0), -0.25);
        assert_eq!(surrogate_loss(0.5, -1.0), 0.75);
        assert_eq!(surrogate_loss(0.0, 0.3), 0.0);
    }

    proptest! {
        #[test]
        fn regret_is_bounded(
            (w, l) in (1usize..10).prop_flat_map(|n| (
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(0.0f64..=1.0, n),
            ))
        ) {
            prop_assume!(w.iter().sum::<f64>() > 0.0);
            let w = ProbabilityVector::from_unnormalized(w).unwrap();
            let l = LossVector::new(l).unwrap();
            let learner = w.expectation(l.as_slice()).unwrap();
            let lo = l.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
            let hi = l.as_slice().iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(learner >= lo - 1e-12 && learner <= hi + 1e-12);
            for r in instantaneous_regret(&w, &l).unwrap() {
                prop_assert!(r.abs() <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn surrogate_range(eta in 0.0f64..=0.5, r in -1.0f64..=1.0) {
            let f = surrogate_loss(eta, r);
            prop_assert!((-0.25..=0.75).contains(&f));
        }
    }
}
