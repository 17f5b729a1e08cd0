//! Control schedules `A(t), B(t), d(t)` for the double well.
//!
//! A schedule is a knot table interpolated with a monotone piecewise cubic
//! (Fritsch-Butland weighted harmonic mean slopes), so interpolated values
//! never overshoot the knot values and the depths stay non-negative.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::potential::DoubleWellParams;

/// One control knot: time and the instantaneous `(A, B, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub t: f64,
    pub depth_right: f64,
    pub depth_left: f64,
    pub separation: f64,
}

impl Knot {
    pub fn new(t: f64, depth_right: f64, depth_left: f64, separation: f64) -> Self {
        Self {
            t,
            depth_right,
            depth_left,
            separation,
        }
    }

    fn channel(&self, c: usize) -> f64 {
        match c {
            0 => self.depth_right,
            1 => self.depth_left,
            _ => self.separation,
        }
    }
}

/// Sinusoidal perturbation amplitudes `(delta_d, delta_A, delta_B)` and the
/// angular frequency `Omega` (rad per `hbar/eps`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub delta_d: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub omega: f64,
}

impl NoiseSpec {
    pub fn new(delta_d: f64, delta_a: f64, delta_b: f64, omega: f64) -> Result<Self> {
        let n = Self {
            delta_d,
            delta_a,
            delta_b,
            omega,
        };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta_d", self.delta_d),
            ("delta_a", self.delta_a),
            ("delta_b", self.delta_b),
            ("omega", self.omega),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct NoiseTerm {
    spec: NoiseSpec,
    /// Evaluate the sinusoid at `T - t` instead of `t`.
    time_reversed: bool,
}

/// Smooth time-dependent double-well control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    width: f64,
    knots: Vec<Knot>,
    /// Knot derivatives per channel (A, B, d).
    slopes: [Vec<f64>; 3],
    reversed: bool,
    noise: Vec<NoiseTerm>,
}

impl PulseSchedule {
    /// Builds a schedule from knots in absolute time; the first knot must be at
    /// `t = 0` and times must increase strictly.
    pub fn new(width: f64, knots: Vec<Knot>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(invalid("knots", "need at least two knots"));
        }
        if knots[0].t != 0.0 {
            return Err(invalid("knots", "first knot must be at t = 0"));
        }
        for pair in knots.windows(2) {
            if !(pair[1].t > pair[0].t) {
                return Err(invalid("knots", "knot times must increase strictly"));
            }
        }
        for k in &knots {
            DoubleWellParams::new(width, k.depth_right, k.depth_left, k.separation)?;
        }
        let times: Vec<f64> = knots.iter().map(|k| k.t).collect();
        let slopes = [0, 1, 2].map(|c| {
            let ys: Vec<f64> = knots.iter().map(|k| k.channel(c)).collect();
            monotone_slopes(&times, &ys)
        });
        Ok(Self {
            width,
            knots,
            slopes,
            reversed: false,
            noise: Vec::new(),
        })
    }

    /// Builds a schedule from knots whose `t` is a fraction of `t_final`.
    pub fn from_fractions(width: f64, t_final: f64, fractions: &[Knot]) -> Result<Self> {
        if !(t_final > 0.0) {
            return Err(invalid("t_final", "must be positive"));
        }
        let knots = fractions
            .iter()
            .map(|k| Knot {
                t: k.t * t_final,
                ..*k
            })
            .collect();
        Self::new(width, knots)
    }

    /// Constant potential held for `t_final`.
    pub fn constant(params: DoubleWellParams, t_final: f64) -> Result<Self> {
        let k = |t| Knot::new(t, params.depth_right, params.depth_left, params.separation);
        Self::new(params.width, vec![k(0.0), k(t_final)])
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn t_final(&self) -> f64 {
        self.knots[self.knots.len() - 1].t
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn is_perturbed(&self) -> bool {
        !self.noise.is_empty()
    }

    /// Largest separation reached by the knot table.
    pub fn max_separation(&self) -> f64 {
        self.knots.iter().map(|k| k.separation).fold(0.0, f64::max)
    }

    /// Instantaneous potential parameters at time `t` in `[0, T]`.
    pub fn sample(&self, t: f64) -> Result<DoubleWellParams> {
        let t_final = self.t_final();
        if !(t >= 0.0 && t <= t_final) {
            return Err(Error::TimeOutOfRange { t, t_final });
        }
        let inner = if self.reversed { t_final - t } else { t };
        let mut v = self.interpolate(inner);
        for term in &self.noise {
            let tau = if term.time_reversed { t_final - t } else { t };
            let s = (term.spec.omega * tau).sin();
            v[0] += term.spec.delta_a * s;
            v[1] += term.spec.delta_b * s;
            v[2] += term.spec.delta_d * s;
        }
        DoubleWellParams::new(self.width, v[0], v[1], v[2])
    }

    fn interpolate(&self, t: f64) -> [f64; 3] {
        let n = self.knots.len();
        if t <= self.knots[0].t {
            let k = &self.knots[0];
            return [k.depth_right, k.depth_left, k.separation];
        }
        if t >= self.knots[n - 1].t {
            let k = &self.knots[n - 1];
            return [k.depth_right, k.depth_left, k.separation];
        }
        let i = match self
            .knots
            .binary_search_by(|k| k.t.partial_cmp(&t).unwrap())
        {
            Ok(i) => {
                let k = &self.knots[i];
                return [k.depth_right, k.depth_left, k.separation];
            }
            Err(i) => i - 1,
        };
        let (k0, k1) = (&self.knots[i], &self.knots[i + 1]);
        let h = k1.t - k0.t;
        let s = (t - k0.t) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        [0, 1, 2].map(|c| {
            let (y0, y1) = (k0.channel(c), k1.channel(c));
            let y =
                h00 * y0 + h10 * h * self.slopes[c][i] + h01 * y1 + h11 * h * self.slopes[c][i + 1];
            // Monotone slopes keep y inside [y0, y1] up to rounding.
            y.clamp(y0.min(y1), y0.max(y1))
        })
    }

    /// Adds `delta * sin(Omega t)` to every control channel.
    pub fn perturbed(&self, noise: NoiseSpec) -> Result<Self> {
        noise.validate()?;
        let mut out = self.clone();
        out.noise.push(NoiseTerm {
            spec: noise,
            time_reversed: false,
        });
        Ok(out)
    }

    /// Time inversion: `reversed.sample(t) == self.sample(T - t)`.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.reversed = !out.reversed;
        for term in &mut out.noise {
            term.time_reversed = !term.time_reversed;
        }
        out
    }

    /// Same knot shape stretched to a new duration (noise terms are dropped).
    pub fn rescaled(&self, t_final: f64) -> Result<Self> {
        let scale = t_final / self.t_final();
        let knots: Vec<Knot> = self
            .knots
            .iter()
            .map(|k| Knot {
                t: k.t * scale,
                ..*k
            })
            .collect();
        let mut out = Self::new(self.width, knots)?;
        out.reversed = self.reversed;
        Ok(out)
    }
}

/// The shipped transport schedule as knot fractions of `T`.
///
/// The right well keeps its calibrated depth. The left well starts raised so
/// that its ground level lies above the first excited level of the right well,
/// is lowered through that avoided crossing while the wells approach, and ends
/// between the two lowest right-well levels with the barrier restored.
pub fn default_transport_knots() -> (f64, Vec<Knot>) {
    let width = DEFAULT_WIDTH;
    let a = DoubleWellParams::calibrated_depth(width);
    let knots = DEFAULT_KNOTS
        .iter()
        .map(|&(s, offset_left, d)| Knot::new(s, a, a - offset_left, d))
        .collect();
    (width, knots)
}

/// Gaussian width (units of `a`) of the shipped schedule.
pub const DEFAULT_WIDTH: f64 = 4.0;

/// `(fraction of T, A - B, d)` for the shipped schedule.
const DEFAULT_KNOTS: [(f64, f64, f64); 3] = [(0.0, 3.0, 14.0), (0.5, 1.7, 7.5), (1.0, 0.4, 14.0)];

/// Default schedule for a total duration `t_final`.
pub fn default_transport_schedule(t_final: f64) -> Result<PulseSchedule> {
    let (width, knots) = default_transport_knots();
    PulseSchedule::from_fractions(width, t_final, &knots)
}

fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let m: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![m[0], m[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (m0, m1) = (m[k - 1], m[k]);
        if m0 * m1 > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / m0 + w2 / m1);
        }
    }
    d[0] = edge_slope(h[0], h[1], m[0], m[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
    d
}

/// One-sided three-point slope, limited to keep the end interval monotone.
fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}
