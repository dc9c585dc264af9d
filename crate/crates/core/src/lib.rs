//! Simulation kernel for clock-driven autonomous computation: quasi-ideal
//! clocks, gate Hamiltonians, bus lanes, renewal oscillators and the bound
//! evaluators that audit them.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the tolerance
//! contracts in the tests assume.

pub mod bussim;
pub mod clockcore;
pub mod gatesim;
pub mod limits;
pub mod oscillator;
mod error;
mod scalar;

pub use error::{Error, Result};
pub use scalar::{cis, cnorm, scale_in_place, vdot, vnorm, Real, C};

pub type ClockModelF64 = clockcore::ClockModel<f64>;
pub type ClockModelF32 = clockcore::ClockModel<f32>;
pub type ClockStateF64 = clockcore::ClockState<f64>;
