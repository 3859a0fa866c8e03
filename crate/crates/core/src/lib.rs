//! Prediction with expert advice in changing environments.
//!
//! Hedge and Squint for a fixed environment; CBCE and Squint-CE as
//! meta-algorithms over black boxes on geometric covering intervals; a
//! seedable environment simulator and a harness that records runs and checks
//! every regret bound as a per-run inequality.

pub mod algorithms;
pub mod covering;
pub mod domain;
pub mod envsim;
pub mod error;
pub mod harness;
pub mod meta;

pub use error::{Error, Result};
