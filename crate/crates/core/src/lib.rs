//! Simulation core for single-atom transport in a time-dependent Gaussian
//! double well and for a Feshbach-resonance controlled-phase gate driven by an
//! optimized magnetic-field ramp.

pub mod error;
pub mod feshbach;
pub mod optctrl;
pub mod potential;
pub mod propagator;
pub mod pulse;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
