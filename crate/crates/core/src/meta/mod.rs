//! Meta-algorithms over black boxes on geometric covering intervals.

pub mod bounds;
pub mod cbce;
pub mod jun;
pub mod squint_ce;

pub use bounds::{
    bound_a_hat, bound_a_hat_ln2t, bound_a_tilde, cbce_hedge_bound, cbce_meta_bound, squintce_bound,
};
pub use cbce::{
    BaseLearner, Cbce, CbceBoxSummary, CbcePrediction, CbceRound, CbceState, CbceStep,
    TIE_TOLERANCE,
};
pub use jun::{jun_weight, JunPrior};
pub use squint_ce::{BoxPrior, SquintCeBoxSummary, SquintCeRound, SquintCeState, ROUTE_TOLERANCE};
