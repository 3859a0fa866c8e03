//! Shared domain types: losses, probability vectors, priors, intervals,
//! regret accounting and the learning-rate grid.

pub mod grid;
pub mod interval;
pub mod ledger;
pub mod loss;
pub mod prob;

pub use grid::{ceil_log2_sqrt, LearningRateGrid};
pub use interval::{all_intervals, Interval};
pub use ledger::{regret_over_set, ExpertPrior, ExpertSet, RegretLedger};
pub use loss::{instantaneous_regret, surrogate_loss, LossVector};
pub use prob::{kl_divergence, log_sum_exp, mix_loss, mix_loss_log, ProbabilityVector};
