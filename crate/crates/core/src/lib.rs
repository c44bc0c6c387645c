//! Extrapolation and deferred-correction Runge-Kutta pairs: construction,
//! exact analysis, and integration.

pub mod analysis;
pub mod builders;
pub mod integrate;
pub mod problems;
pub mod exact;

pub use exact::*;
