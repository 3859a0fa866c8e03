//! Regret accounting over arbitrary contiguous intervals.
//!
//! The ledger keeps prefix sums of `r_t^k` and `(r_t^k)^2`, so `R_I^k` and
//! `V_I^k` for any interval cost two lookups.

use crate::domain::interval::Interval;
use crate::domain::prob::ProbabilityVector;
use crate::error::{Error, Result};

/// Per-round instantaneous regrets of a learner against each expert.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    experts: usize,
    rounds: usize,
    // (rounds + 1) × experts, row 0 is all zeros.
    prefix_regret: Vec<f64>,
    prefix_variance: Vec<f64>,
}

impl RegretLedger {
    pub fn new(experts: usize) -> Result<Self> {
        if experts == 0 {
            return Err(Error::TooFewExperts { needed: 1, got: 0 });
        }
        Ok(Self {
            experts,
            rounds: 0,
            prefix_regret: vec![0.0; experts],
            prefix_variance: vec![0.0; experts],
        })
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Appends round `rounds() + 1`.
    pub fn push(&mut self, r: &[f64]) -> Result<()> {
        if r.len() != self.experts {
            return Err(Error::DimensionMismatch {
                expected: self.experts,
                found: r.len(),
            });
        }
        if let Some(bad) = r.iter().find(|x| !x.is_finite() || x.abs() > 1.0 + 1e-12) {
            return Err(Error::InvalidSpec(format!(
                "instantaneous regret {bad} outside [-1, 1]"
            )));
        }
        let base = self.rounds * self.experts;
        for (k, &rk) in r.iter().enumerate() {
            let pr = self.prefix_regret[base + k] + rk;
            let pv = self.prefix_variance[base + k] + rk * rk;
            self.prefix_regret.push(pr);
            self.prefix_variance.push(pv);
        }
        self.rounds += 1;
        Ok(())
    }

    fn check(&self, expert: usize, interval: Interval) -> Result<()> {
        if expert >= self.experts {
            return Err(Error::ExpertOutOfRange {
                index: expert,
                experts: self.experts,
            });
        }
        if interval.end() > self.rounds {
            return Err(Error::InvalidInterval {
                start: interval.start(),
                end: interval.end(),
            });
        }
        Ok(())
    }

    /// `R_I^k`.
    pub fn regret(&self, expert: usize, interval: Interval) -> Result<f64> {
        self.check(expert, interval)?;
        let hi = interval.end() * self.experts + expert;
        let lo = (interval.start() - 1) * self.experts + expert;
        Ok(self.prefix_regret[hi] - self.prefix_regret[lo])
    }

    /// `V_I^k`.
    pub fn variance(&self, expert: usize, interval: Interval) -> Result<f64> {
        self.check(expert, interval)?;
        let hi = interval.end() * self.experts + expert;
        let lo = (interval.start() - 1) * self.experts + expert;
        Ok(self.prefix_variance[hi] - self.prefix_variance[lo])
    }

    /// `r_t^k` for a single round.
    pub fn round_regret(&self, round: usize, expert: usize) -> Result<f64> {
        self.regret(expert, Interval::new(round, round)?)
    }
}

/// A nonempty set of expert indices (0-based, sorted, deduplicated).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExpertSet(Vec<usize>);

impl ExpertSet {
    pub fn new(mut members: Vec<usize>, experts: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyExpertSet);
        }
        members.sort_unstable();
        members.dedup();
        if let Some(&index) = members.iter().find(|&&k| k >= experts) {
            return Err(Error::ExpertOutOfRange { index, experts });
        }
        Ok(Self(members))
    }

    pub fn singleton(k: usize) -> Self {
        Self(vec![k])
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    /// 1-based, `|`-separated, e.g. `1|3`.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|k| (k + 1).to_string())
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// Prior `π` over experts with conditioning on subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertPrior(ProbabilityVector);

impl ExpertPrior {
    pub fn new(pi: ProbabilityVector) -> Self {
        Self(pi)
    }

    pub fn uniform(experts: usize) -> Result<Self> {
        Ok(Self(ProbabilityVector::uniform(experts)?))
    }

    pub fn experts(&self) -> usize {
        self.0.len()
    }

    pub fn distribution(&self) -> &ProbabilityVector {
        &self.0
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.0.len() as f64;
        self.0.iter().all(|p| (p - u).abs() <= 1e-15)
    }

    /// `π(𝒦)`.
    pub fn mass(&self, set: &ExpertSet) -> f64 {
        set.members().iter().map(|&k| self.0[k]).sum()
    }

    /// `π(·|𝒦)` as a full-length vector that is zero outside `𝒦`.
    pub fn conditional(&self, set: &ExpertSet) -> Result<ProbabilityVector> {
        if set.members().iter().any(|&k| k >= self.experts()) {
            return Err(Error::ExpertOutOfRange {
                index: *set.members().last().unwrap_or(&0),
                experts: self.experts(),
            });
        }
        let mass = self.mass(set);
        if mass <= 0.0 {
            return Err(Error::ZeroPriorMass);
        }
        let mut w = vec![0.0; self.experts()];
        for &k in set.members() {
            w[k] = self.0[k] / mass;
        }
        ProbabilityVector::from_unnormalized(w)
    }
}

/// `(R_I^𝒦, V_I^𝒦)`: the `π(·|𝒦)`-averages of `R_I^k` and `V_I^k`.
pub fn regret_over_set(
    ledger: &RegretLedger,
    prior: &ExpertPrior,
    set: &ExpertSet,
    interval: Interval,
) -> Result<(f64, f64)> {
    if prior.experts() != ledger.experts() {
        return Err(Error::DimensionMismatch {
            expected: ledger.experts(),
            found: prior.experts(),
        });
    }
    let cond = prior.conditional(set)?;
    let mut r = 0.0;
    let mut v = 0.0;
    for &k in set.members() {
        r += cond[k] * ledger.regret(k, interval)?;
        v += cond[k] * ledger.variance(k, interval)?;
    }
    Ok((r, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ledger_from(rows: &[Vec<f64>]) -> RegretLedger {
        let mut l = RegretLedger::new(rows[0].len()).unwrap();
        for r in rows {
            l.push(r).unwrap();
        }
        l
    }

    #[test]
    fn set_average_examples() {
        let ledger = ledger_from(&[vec![1.0, -0.5], vec![1.0, -0.5]]);
        let all = Interval::new(1, 2).unwrap();
        let prior = ExpertPrior::uniform(2).unwrap();
        let both = ExpertSet::new(vec![0, 1], 2).unwrap();
        let (r, v) = regret_over_set(&ledger, &prior, &both, all).unwrap();
        assert_abs_diff_eq!(r, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v, (2.0 + 0.5) / 2.0, epsilon = 1e-15);

        let skewed = ExpertPrior::new(ProbabilityVector::new(vec![0.9, 0.1]).unwrap());
        let one = ExpertSet::singleton(1);
        let (r, v) = regret_over_set(&ledger, &skewed, &one, all).unwrap();
        assert_abs_diff_eq!(r, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn set_errors() {
        assert!(matches!(
            ExpertSet::new(vec![], 3),
            Err(Error::EmptyExpertSet)
        ));
        assert!(ExpertSet::new(vec![3], 3).is_err());
        let prior = ExpertPrior::new(ProbabilityVector::new(vec![1.0, 0.0]).unwrap());
        assert!(matches!(
            prior.conditional(&ExpertSet::singleton(1)),
            Err(Error::ZeroPriorMass)
        ));
        let ledger = ledger_from(&[vec![0.0, 0.0]]);
        assert!(ledger.regret(0, Interval::new(1, 2).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn prefix_sums_are_consistent(
            rows in prop::collection::vec(prop::collection::vec(-1.0f64..=1.0, 3), 2..40),
            cut in 0.0f64..1.0,
        ) {
            let ledger = ledger_from(&rows);
            let t = rows.len();
            let c = 1 + ((t - 1) as f64 * cut) as usize;
            let c = c.min(t - 1).max(1);
            for k in 0..3 {
                let whole = ledger.regret(k, Interval::new(1, t).unwrap()).unwrap();
                let left = ledger.regret(k, Interval::new(1, c).unwrap()).unwrap();
                let right = ledger.regret(k, Interval::new(c + 1, t).unwrap()).unwrap();
                prop_assert!((whole - left - right).abs() <= 1e-12);
                for i in all_prefixes(t) {
                    let v = ledger.variance(k, i).unwrap();
                    prop_assert!(v <= i.len() as f64 + 1e-12 && v >= -1e-12);
                }
            }
        }
    }

    fn all_prefixes(t: usize) -> impl Iterator<Item = Interval> {
        crate::domain::interval::all_intervals(t)
    }
}
