//! Gaussian double-well potential.
//!
//! `V(x) = -A exp(-x^2 / 2w^2) - B exp(-(x + d)^2 / 2w^2)`: the right well of
//! depth `A` sits at the origin, the left well of depth `B` at `x = -d`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::units::SpatialGrid;

/// Instantaneous shape of the double well (lengths in `a`, energies in `eps`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleWellParams {
    pub width: f64,
    pub depth_right: f64,
    pub depth_left: f64,
    pub separation: f64,
}

impl DoubleWellParams {
    pub fn new(width: f64, depth_right: f64, depth_left: f64, separation: f64) -> Result<Self> {
        let p = Self {
            width,
            depth_right,
            depth_left,
            separation,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(invalid(
                "width",
                format!("must be positive, got {}", self.width),
            ));
        }
        if !(self.depth_right >= 0.0) {
            return Err(invalid(
                "depth_right",
                format!("must be non-negative, got {}", self.depth_right),
            ));
        }
        if !(self.depth_left >= 0.0) {
            return Err(invalid(
                "depth_left",
                format!("must be non-negative, got {}", self.depth_left),
            ));
        }
        if !(self.separation >= 0.0) {
            return Err(invalid(
                "separation",
                format!("must be non-negative, got {}", self.separation),
            ));
        }
        Ok(())
    }

    /// Depth of a Gaussian well whose harmonic frequency equals the unit-system
    /// frequency: `A / w^2 = 2` in oscillator units.
    pub fn calibrated_depth(width: f64) -> f64 {
        2.0 * width * width
    }

    pub fn potential(&self, x: f64) -> f64 {
        let two_w2 = 2.0 * self.width * self.width;
        let xl = x + self.separation;
        -self.depth_right * (-x * x / two_w2).exp() - self.depth_left * (-xl * xl / two_w2).exp()
    }

    pub fn sample(&self, grid: &SpatialGrid) -> Vec<f64> {
        (0..grid.len()).map(|i| self.potential(grid.x(i))).collect()
    }
}
