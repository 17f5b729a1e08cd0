//! Oscillator unit system and the space/time discretization.
//!
//! Lengths are measured in the oscillator length `a = sqrt(hbar / (m omega))`,
//! energies in `eps = hbar^2 / (2 m a^2)` and times in `hbar / eps`. With these
//! choices the single-particle Hamiltonian reads `H = -d^2/dx^2 + V(x)` and a
//! harmonic trap of frequency `omega` becomes `V = x^2` with level spacing 2.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Physical constants (CODATA 2018).
pub mod constants {
    /// Planck constant, exact (J s).
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Reduced Planck constant (J s).
    pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
    /// Unified atomic mass unit (kg).
    pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
    /// Bohr radius (m).
    pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
    /// Bohr magneton expressed per gauss (J/G).
    pub const BOHR_MAGNETON_PER_GAUSS: f64 = 9.274_010_078_3e-28;
    /// Atomic mass of rubidium-87 in atomic mass units.
    pub const RB87_MASS_U: f64 = 86.909_180_531;

    /// Mass of a rubidium-87 atom (kg).
    pub fn rb87_mass() -> f64 {
        RB87_MASS_U * ATOMIC_MASS_UNIT
    }
}

use constants::HBAR;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantityKind {
    Length,
    Energy,
    Time,
}

impl FromStr for QuantityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "length" => Ok(Self::Length),
            "energy" => Ok(Self::Energy),
            "time" => Ok(Self::Time),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for QuantityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Length => "length",
            Self::Energy => "energy",
            Self::Time => "time",
        })
    }
}

/// Dimensionless scale fixed by an atomic mass and a reference trap frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// Atomic mass (kg).
    pub mass: f64,
    /// Reference angular frequency (rad/s).
    pub omega: f64,
    /// Oscillator length (m).
    pub length: f64,
    /// Energy unit (J).
    pub energy: f64,
    /// Time unit `hbar / energy` (s).
    pub time: f64,
}

impl UnitSystem {
    pub fn new(mass: f64, omega: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid("mass", format!("must be positive, got {mass}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid("omega", format!("must be positive, got {omega}")));
        }
        let length = (HBAR / (mass * omega)).sqrt();
        let energy = HBAR * HBAR / (2.0 * mass * length * length);
        Ok(Self {
            mass,
            omega,
            length,
            energy,
            time: HBAR / energy,
        })
    }

    /// Rubidium-87 with a trap frequency given in Hz.
    pub fn rubidium87(frequency_hz: f64) -> Result<Self> {
        Self::new(
            constants::rb87_mass(),
            2.0 * std::f64::consts::PI * frequency_hz,
        )
    }

    fn scale(&self, kind: QuantityKind) -> f64 {
        match kind {
            QuantityKind::Length => self.length,
            QuantityKind::Energy => self.energy,
            QuantityKind::Time => self.time,
        }
    }

    pub fn to_si(&self, value: f64, kind: QuantityKind) -> f64 {
        value * self.scale(kind)
    }

    pub fn from_si(&self, value: f64, kind: QuantityKind) -> f64 {
        value / self.scale(kind)
    }

    /// Converts an angular frequency in rad/s to rad per time unit.
    pub fn angular_frequency_from_si(&self, omega_si: f64) -> f64 {
        omega_si * self.time
    }
}

/// Uniform grid on `[x_min, x_max]` in units of `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    spacing: f64,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(invalid(
                "n_points",
                format!("need at least 3, got {n_points}"),
            ));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(invalid(
                "x_min/x_max",
                format!("require x_min < x_max, got [{x_min}, {x_max}]"),
            ));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
            spacing: (x_max - x_min) / (n_points - 1) as f64,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    pub fn same_as(&self, other: &SpatialGrid) -> bool {
        self == other
    }
}

/// Uniform time grid on `[0, T]` in units of `hbar / eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_final: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(invalid("n_steps", "need at least one step"));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(invalid(
                "t_final",
                format!("must be positive, got {t_final}"),
            ));
        }
        Ok(Self { t_final, n_steps })
    }

    /// Grid with step as close as possible to (and never above) `dt`.
    pub fn with_step(t_final: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {dt}")));
        }
        let n = (t_final / dt - 1e-9).ceil().max(1.0) as usize;
        Self::new(t_final, n)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn time(&self, step: usize) -> f64 {
        if step == self.n_steps {
            self.t_final
        } else {
            step as f64 * self.dt()
        }
    }

    /// Same duration, twice the steps.
    pub fn refined(&self) -> Self {
        Self {
            t_final: self.t_final,
            n_steps: 2 * self.n_steps,
        }
    }
}
