//! Learners for a single, non-changing environment.

pub mod bounds;
pub mod ew;
pub mod hedge;
pub mod squint;
pub mod surrogate;

pub use bounds::{bound_a, hedge_bound, hedge_default_rate, squint_bound};
pub use ew::EwPosterior;
pub use hedge::HedgeState;
pub use squint::{marginalize, SquintState, SquintStep, CONSISTENCY_TOLERANCE};
pub use surrogate::{
    comparator, comparator_kl, comparator_kl_direct, surrogate_regret, surrogate_regret_telescoped,
};
