//! Decoupled random walks: samplers for the walk functionals, exact samplers
//! for their extremal-process limits, and statistical checks tying the two
//! together.

pub mod error;
pub mod rng;
pub mod limits;
pub mod tails;
pub mod verify;
pub mod walks;

pub use error::{Error, Result};
pub use tails::{classify_regime, Regime, TailModel};
