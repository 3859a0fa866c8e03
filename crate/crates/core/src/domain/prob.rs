//! Probability vectors and log-domain helpers.
//!
//! Every exponential-weights style normalization in the crate goes through
//! [`log_sum_exp`] so that posteriors of the form `e^{ηR − η²V}` never
//! overflow, however long the run.

use crate::error::{Error, Result};

/// Absolute tolerance accepted on the total mass of a caller-supplied
/// probability vector before it is renormalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// `ln Σ exp(x_i)` with the maximum shifted out. Returns `-inf` for an empty
/// slice or when every entry is `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// A finite distribution. Entries are nonnegative and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Accepts a vector that already sums to one (within
    /// [`NORMALIZATION_TOLERANCE`]) and renormalizes it exactly.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let sum = check_weights(&weights)?;
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidProbability(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(Self(weights.into_iter().map(|w| w / sum).collect()))
    }

    /// Normalizes any nonnegative vector with positive mass.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        let sum = check_weights(&weights)?;
        Ok(Self(weights.into_iter().map(|w| w / sum).collect()))
    }

    /// Normalizes `exp(log_weights)` with a max-shifted log-sum-exp.
    /// Entries equal to `-inf` get probability zero.
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(Error::EmptySupport);
        }
        if log_weights
            .iter()
            .any(|x| x.is_nan() || *x == f64::INFINITY)
        {
            return Err(Error::InvalidProbability(
                "log-weights must be finite or -inf".into(),
            ));
        }
        let lse = log_sum_exp(log_weights);
        if lse == f64::NEG_INFINITY {
            return Err(Error::EmptySupport);
        }
        let w: Vec<f64> = log_weights.iter().map(|&x| (x - lse).exp()).collect();
        // One extra pass removes the rounding left by exp().
        let sum: f64 = w.iter().sum();
        Ok(Self(w.into_iter().map(|x| x / sum).collect()))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySupport);
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn point_mass(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::ExpertOutOfRange { index, experts: n });
        }
        let mut w = vec![0.0; n];
        w[index] = 1.0;
        Ok(Self(w))
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

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `Σ p_i x_i`.
    pub fn expectation(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.0.len(),
                found: values.len(),
            });
        }
        Ok(self.0.iter().zip(values).map(|(p, x)| p * x).sum())
    }

    /// Natural log of each entry (`-inf` for zeros).
    pub fn log_weights(&self) -> Vec<f64> {
        self.0.iter().map(|p| p.ln()).collect()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &ProbabilityVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn check_weights(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::EmptySupport);
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(Error::InvalidProbability(format!(
            "entry {i} is {w}, expected a finite nonnegative number"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(Error::EmptySupport);
    }
    Ok(sum)
}

/// Mix loss `−ln E_P[e^{−g}]`.
///
/// Computed as `−LSE(ln p_i − g_i)` over the support of `dist`, so large
/// losses cannot underflow the expectation to zero.
pub fn mix_loss(losses: &[f64], dist: &ProbabilityVector) -> Result<f64> {
    if losses.len() != dist.len() {
        return Err(Error::DimensionMismatch {
            expected: dist.len(),
            found: losses.len(),
        });
    }
    let terms: Vec<f64> = dist
        .iter()
        .zip(losses)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, g)| p.ln() - g)
        .collect();
    if terms.is_empty() {
        return Err(Error::EmptySupport);
    }
    Ok(-log_sum_exp(&terms))
}

/// Mix loss against a distribution given by (unnormalized) log-weights.
pub fn mix_loss_log(losses: &[f64], log_weights: &[f64]) -> Result<f64> {
    if losses.len() != log_weights.len() {
        return Err(Error::DimensionMismatch {
            expected: log_weights.len(),
            found: losses.len(),
        });
    }
    let norm = log_sum_exp(log_weights);
    if norm == f64::NEG_INFINITY {
        return Err(Error::EmptySupport);
    }
    let terms: Vec<f64> = log_weights
        .iter()
        .zip(losses)
        .map(|(lw, g)| lw - g)
        .collect();
    Ok(norm - log_sum_exp(&terms))
}

/// `KL(q‖p) = Σ q_i ln(q_i / p_i)` with `0 ln 0 = 0`.
pub fn kl_divergence(q: &ProbabilityVector, p: &ProbabilityVector) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    let mut kl = 0.0;
    for (i, (&qi, &pi)) in q.iter().zip(p.iter()).enumerate() {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Err(Error::SupportViolation { index: i });
        }
        kl += qi * (qi / pi).ln();
    }
    // Rounding can leave a tiny negative value when q == p.
    Ok(kl.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn mix_loss_point_mass_returns_that_loss() {
        let p = ProbabilityVector::point_mass(3, 1).unwrap();
        assert_abs_diff_eq!(
            mix_loss(&[5.0, 0.25, -2.0], &p).unwrap(),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn mix_loss_constant_losses() {
        let p = ProbabilityVector::uniform(4).unwrap();
        assert_abs_diff_eq!(mix_loss(&[0.7; 4], &p).unwrap(), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn mix_loss_uniform_zero_ln3() {
        // −ln((1 + 1/3)/2) = ln(3/2)
        let p = ProbabilityVector::uniform(2).unwrap();
        let v = mix_loss(&[0.0, 3f64.ln()], &p).unwrap();
        assert_abs_diff_eq!(v, 1.5f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.405465, epsilon = 1e-6);
    }

    #[test]
    fn mix_loss_survives_huge_losses() {
        let p = ProbabilityVector::uniform(2).unwrap();
        let v = mix_loss(&[5000.0, 5001.0], &p).unwrap();
        assert!(v.is_finite());
        assert!((5000.0..=5001.0).contains(&v));
    }

    #[test]
    fn mix_loss_log_matches_normalized() {
        let lw = [0.3f64.ln() + 7.0, 0.7f64.ln() + 7.0];
        let p = ProbabilityVector::new(vec![0.3, 0.7]).unwrap();
        let g = [0.2, 1.3];
        assert_abs_diff_eq!(
            mix_loss_log(&g, &lw).unwrap(),
            mix_loss(&g, &p).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn kl_examples() {
        let p = ProbabilityVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let q = ProbabilityVector::new(vec![0.75, 0.25]).unwrap();
        let expected = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert_abs_diff_eq!(kl_divergence(&q, &p).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.130812, epsilon = 1e-6);
        let u = ProbabilityVector::uniform(5).unwrap();
        let d = ProbabilityVector::point_mass(5, 2).unwrap();
        assert_abs_diff_eq!(kl_divergence(&d, &u).unwrap(), 5f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn kl_support_violation() {
        let q = ProbabilityVector::new(vec![0.5, 0.5]).unwrap();
        let p = ProbabilityVector::point_mass(2, 0).unwrap();
        assert!(matches!(
            kl_divergence(&q, &p),
            Err(Error::SupportViolation { index: 1 })
        ));
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbabilityVector::new(vec![]).is_err());
        assert!(ProbabilityVector::from_log_weights(&[f64::NEG_INFINITY; 3]).is_err());
        assert!(mix_loss(&[1.0], &ProbabilityVector::uniform(2).unwrap()).is_err());
    }

    fn dist(n: usize) -> impl Strategy<Value = ProbabilityVector> {
        prop::collection::vec(0.01f64..1.0, n)
            .prop_map(|w| ProbabilityVector::from_unnormalized(w).unwrap())
    }

    proptest! {
        #[test]
        fn mix_loss_shift_and_jensen(
            (g, p, c) in (1usize..8).prop_flat_map(|n| (
                prop::collection::vec(-3.0f64..3.0, n),
                dist(n),
                -10.0f64..10.0,
            ))
        ) {
            let base = mix_loss(&g, &p).unwrap();
            let shifted: Vec<f64> = g.iter().map(|x| x + c).collect();
            prop_assert!((mix_loss(&shifted, &p).unwrap() - (base + c)).abs() <= 1e-12);
            prop_assert!(base <= p.expectation(&g).unwrap() + 1e-12);
            let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(base >= lo - 1e-12 && base <= hi + 1e-12);
        }

        #[test]
        fn kl_nonnegative_and_zero_on_identity(
            (q, p) in (1usize..8).prop_flat_map(|n| (dist(n), dist(n)))
        ) {
            prop_assert!(kl_divergence(&q, &p).unwrap() >= 0.0);
            prop_assert!(kl_divergence(&p, &p).unwrap().abs() <= 1e-12);
        }

        #[test]
        fn from_log_weights_normalizes(lw in prop::collection::vec(-800.0f64..800.0, 1..10)) {
            let p = ProbabilityVector::from_log_weights(&lw).unwrap();
            let sum: f64 = p.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }
    }
}
