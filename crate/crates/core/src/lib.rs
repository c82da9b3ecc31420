//! High-precision digit-restricted harmonic sums.
//!
//! Computes sums of 1/m over positive integers whose base-b expansion
//! contains exactly k occurrences of a digit d, together with the exact
//! rational moment tables behind them, the power-series form of those
//! moments, and asymptotic expansions of the sums for large bases.

pub mod asymptotics;
pub mod error;
pub mod fixed;
pub mod irwin;
pub mod moments;
pub mod series;
pub mod spec;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use spec::{DigitSpec, RegimeId};
