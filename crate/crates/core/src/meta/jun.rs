use crate::covering::{floor_log2, CoveringSchedule};
use crate::domain::ProbabilityVector;
use crate::error::{Error, Result};

/// Prior over boxes favouring early starts:
/// `τ(b_J) = Z^{−1} / (J1² (1 + ⌊log2 J1⌋))`, normalized over the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct JunPrior {
    weights: ProbabilityVector,
    normalizer: f64,
}

/// Unnormalized weight `1 / (J1² (1 + ⌊log2 J1⌋))`.
pub fn jun_weight(start: usize) -> f64 {
    let s = start as f64;
    1.0 / (s * s * (1.0 + floor_log2(start) as f64))
}

impl JunPrior {
    pub fn new(schedule: &CoveringSchedule) -> Result<Self> {
        if schedule.is_empty() {
            return Err(Error::EmptySupport);
        }
        let raw: Vec<f64> = schedule
            .boxes()
            .iter()
            .map(|j| jun_weight(j.start()))
            .collect();
        // Sum smallest first.
        let mut sorted = raw.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite weights"));
        let normalizer: f64 = sorted.iter().sum();
        let weights = ProbabilityVector::new(raw.iter().map(|w| w / normalizer).collect())?;
        Ok(Self {
            weights,
            normalizer,
        })
    }

    /// `Z`.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn weights(&self) -> &ProbabilityVector {
        &self.weights
    }

    pub fn into_weights(self) -> ProbabilityVector {
        self.weights
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unnormalized_examples() {
        assert_eq!(jun_weight(1), 1.0);
        assert_eq!(jun_weight(2), 0.125);
        assert_abs_diff_eq!(jun_weight(4), 1.0 / 48.0, epsilon = 1e-15);
    }

    #[test]
    fn single_box() {
        let p = JunPrior::new(&CoveringSchedule::enumerate_boxes(1).unwrap()).unwrap();
        assert_eq!(p.normalizer(), 1.0);
        assert_eq!(p.weights().as_slice(), &[1.0]);
    }

    #[test]
    fn normalizer_below_basel_sum() {
        let basel = std::f64::consts::PI.powi(2) / 6.0;
        for t in [2usize, 3, 7, 64, 1000, 1 << 16] {
            let p = JunPrior::new(&CoveringSchedule::enumerate_boxes(t).unwrap()).unwrap();
            assert!(p.normalizer() <= basel + 1e-9, "T = {t}");
            let total: f64 = p.weights().iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn same_start_same_weight() {
        let s = CoveringSchedule::enumerate_boxes(16).unwrap();
        let p = JunPrior::new(&s).unwrap();
        let a = s
            .id_of(&crate::covering::CoveringInterval::from_bounds(2, 2).unwrap())
            .unwrap();
        let b = s
            .id_of(&crate::covering::CoveringInterval::from_bounds(2, 3).unwrap())
            .unwrap();
        assert_eq!(p.weights()[a], p.weights()[b]);
    }
}
