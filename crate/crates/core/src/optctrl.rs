//! Optimal control of the gate field ramp, plus a derivative-free refinement
//! loop for transport schedules.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::feshbach::{
    build_hamiltonian, RampSegment, ResonanceModel, ResonanceState, SegmentPropagator,
};
use crate::pulse::{Knot, PulseSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlProblem {
    pub model: ResonanceModel,
    pub n_segments: usize,
    /// Ramp duration in seconds.
    pub total_time: f64,
    /// Field bounds in gauss.
    pub bounds: (f64, f64),
    pub target_phase: f64,
    /// Starting field values, one per segment.
    pub initial_ramp: Vec<f64>,
    /// Stop once the cost drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl ControlProblem {
    /// A problem starting from the symmetric linear ramp
    /// `B0 + 50 Delta -> low -> B0 + 50 Delta`.
    pub fn new(
        model: ResonanceModel,
        n_segments: usize,
        total_time: f64,
        low: f64,
        bounds: (f64, f64),
    ) -> Result<Self> {
        let p = Self {
            initial_ramp: symmetric_ramp(model.b0 + 50.0 * model.width, low, n_segments),
            model,
            n_segments,
            total_time,
            bounds,
            target_phase: PI,
            tolerance: 1e-5,
            max_iterations: 500,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.n_segments < 2 {
            return Err(invalid("n_segments", "need at least two segments"));
        }
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(invalid("total_time", "must be positive"));
        }
        let (lo, hi) = self.bounds;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(invalid(
                "bounds",
                format!("need B_min < B_max, got ({lo}, {hi})"),
            ));
        }
        if self.initial_ramp.len() != self.n_segments {
            return Err(invalid(
                "initial_ramp",
                format!(
                    "expected {} values, got {}",
                    self.n_segments,
                    self.initial_ramp.len()
                ),
            ));
        }
        if self.initial_ramp.iter().any(|b| !b.is_finite()) {
            return Err(invalid("initial_ramp", "values must be finite"));
        }
        if !self.target_phase.is_finite() {
            return Err(invalid("target_phase", "must be finite"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(invalid("tolerance", "must be non-negative"));
        }
        Ok(())
    }

    pub fn segment_duration(&self) -> f64 {
        self.total_time / self.n_segments as f64
    }

    /// Field values as ramp segments of equal duration.
    pub fn segments(&self, fields: &[f64]) -> Vec<RampSegment> {
        let duration = self.segment_duration();
        fields
            .iter()
            .map(|&field| RampSegment { duration, field })
            .collect()
    }

    fn project(&self, fields: &mut [f64]) {
        let (lo, hi) = self.bounds;
        fields.iter_mut().for_each(|b| *b = b.clamp(lo, hi));
    }

    fn check(&self, fields: &[f64]) -> Result<()> {
        if fields.len() != self.n_segments {
            return Err(invalid(
                "ramp",
                format!("expected {} values, got {}", self.n_segments, fields.len()),
            ));
        }
        let (lo, hi) = self.bounds;
        if let Some(b) = fields.iter().find(|b| !(**b >= lo && **b <= hi)) {
            return Err(invalid("ramp", format!("field {b} G outside [{lo}, {hi}]")));
        }
        Ok(())
    }
}

impl ControlProblem {
    /// 64 segments over 0.5 ms, starting from a ramp whose bottom sits two
    /// widths below resonance, with fields kept within 100 widths of `B0`.
    pub fn desk_scale(model: ResonanceModel) -> Result<Self> {
        let (b0, w) = (model.b0, model.width);
        Self::new(
            model,
            64,
            5e-4,
            b0 - 2.0 * w,
            (b0 - 100.0 * w, b0 + 100.0 * w),
        )
    }
}

/// `n` values going linearly from `edge` to `low` and back.
pub fn symmetric_ramp(edge: f64, low: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let s = (k as f64 + 0.5) / n as f64;
            let depth = 1.0 - (2.0 * s - 1.0).abs();
            edge + (low - edge) * depth
        })
        .collect()
}

/// Cost together with what went into it.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub cost: f64,
    /// `<v=0|psi(T)>`.
    pub overlap: Complex64,
    pub gradient: Option<Vec<f64>>,
}

impl Evaluation {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.overlap.norm_sqr()
    }

    /// `|phi - target|` wrapped into `[0, pi]`.
    pub fn phase_error(&self, target: f64) -> f64 {
        wrap(self.overlap.arg() - target).abs()
    }
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(TAU) - PI
}

fn cost_from(overlap: Complex64, target: f64) -> f64 {
    1.0 - (Complex64::from_polar(1.0, -target) * overlap).re
}

/// `J = 1 - Re(exp(-i phi_target) <v=0|psi(T)>)`.
pub fn cost(fields: &[f64], problem: &ControlProblem) -> Result<f64> {
    Ok(evaluate(fields, problem, false)?.cost)
}

/// `dJ/dB_k` for every segment.
pub fn gradient(fields: &[f64], problem: &ControlProblem) -> Result<Vec<f64>> {
    Ok(evaluate(fields, problem, true)?
        .gradient
        .unwrap_or_default())
}

/// Forward propagation and, on request, the adjoint gradient.
///
/// With `U_k = Q exp(-i L tau) Q^T` the derivative along `dH = s e0 e0^T` is
/// `Q (D o (Q^T dH Q)) Q^T` where `D_ij` is the divided difference of
/// `exp(-i x tau)` at the eigenvalues `L_i`, `L_j`.
pub fn evaluate(
    fields: &[f64],
    problem: &ControlProblem,
    with_gradient: bool,
) -> Result<Evaluation> {
    problem.check(fields)?;
    let model = &problem.model;
    let tau = model.reduced_time(problem.segment_duration());
    let props = fields
        .iter()
        .map(|&b| Ok(SegmentPropagator::new(build_hamiltonian(b, model)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut states = Vec::with_capacity(props.len() + 1);
    states.push(ResonanceState::ground(model).amplitudes);
    for p in &props {
        let next = p.apply(states.last().unwrap(), tau, false);
        states.push(next);
    }
    let overlap = states.last().unwrap()[1];
    let cost = cost_from(overlap, problem.target_phase);
    if !with_gradient {
        return Ok(Evaluation {
            cost,
            overlap,
            gradient: None,
        });
    }
    let c = Complex64::from_polar(1.0, -problem.target_phase);
    let slope = model.reduced_slope();
    let dim = model.dimension();
    let mut costate = vec![Complex64::new(0.0, 0.0); dim];
    costate[1] = Complex64::new(1.0, 0.0);
    let mut grad = vec![0.0; props.len()];
    for k in (0..props.len()).rev() {
        let p = &props[k];
        let a = p.to_eigenbasis(&states[k]);
        let b = p.to_eigenbasis(&costate);
        let q: Vec<f64> = (0..dim).map(|i| p.vectors[(0, i)]).collect();
        let mut dz = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            let wi = b[i].conj() * q[i];
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..dim {
                row += divided_difference(p.values[i], p.values[j], tau) * q[j] * a[j];
            }
            dz += wi * row;
        }
        grad[k] = -(c * dz * slope).re;
        costate = p.apply(&costate, tau, true);
    }
    Ok(Evaluation {
        cost,
        overlap,
        gradient: Some(grad),
    })
}

/// `(exp(-i x tau) - exp(-i y tau)) / (x - y)`, written to stay accurate as
/// `x -> y`.
fn divided_difference(x: f64, y: f64, tau: f64) -> Complex64 {
    let half = 0.5 * (x - y) * tau;
    let sinc = if half.abs() < 1e-4 {
        1.0 - half * half / 6.0
    } else {
        half.sin() / half
    };
    Complex64::new(0.0, -tau) * Complex64::from_polar(sinc, -0.5 * (x + y) * tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost: f64,
    pub infidelity: f64,
    pub phase_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationTrace {
    /// Accepted iterates, starting with the initial ramp.
    pub iterations: Vec<IterationRecord>,
    pub best_ramp: Vec<f64>,
    pub converged: bool,
}

impl OptimizationTrace {
    pub fn best(&self) -> &IterationRecord {
        self.iterations
            .last()
            .expect("trace always holds the initial ramp")
    }
}

/// Minimizes the cost with projected Levenberg-Marquardt steps.
///
/// Because the final state is normalized, `J = |exp(-i phi_t) psi(T) - |v=0>|^2 / 2`,
/// a least-squares problem in the real and imaginary parts of `psi(T)`. Steps
/// are damped Gauss-Newton steps projected onto the bounds; a step is accepted
/// only if it passes an Armijo test on `J`, otherwise the damping grows. The
/// accepted costs therefore never increase.
pub fn optimize(problem: &ControlProblem) -> Result<OptimizationTrace> {
    optimize_with(problem, |_| {})
}

/// [`optimize`] with a callback after every accepted step.
pub fn optimize_with<F>(problem: &ControlProblem, mut on_step: F) -> Result<OptimizationTrace>
where
    F: FnMut(&IterationRecord),
{
    problem.validate()?;
    let target = problem.target_phase;
    let (lo, hi) = problem.bounds;
    let mut x = problem.initial_ramp.clone();
    problem.project(&mut x);
    let record = |iteration: usize, e: &Evaluation| IterationRecord {
        iteration,
        cost: e.cost,
        infidelity: e.infidelity(),
        phase_error: e.phase_error(target),
    };
    let (mut current, mut residual, mut jac) = residual_jacobian(&x, problem)?;
    let mut iterations = vec![record(0, &current)];
    on_step(&iterations[0]);
    let mut damping = 1e-3 * jac.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    let mut converged = current.cost < problem.tolerance;
    let mut iteration = 0;
    'outer: while !converged && iteration < problem.max_iterations {
        iteration += 1;
        let g = jac.transpose() * &residual;
        // Components pinned at a bound with the gradient pushing outwards stay put.
        let mut active = jac.clone();
        for k in 0..x.len() {
            if (x[k] <= lo && g[k] > 0.0) || (x[k] >= hi && g[k] < 0.0) {
                active.column_mut(k).fill(0.0);
            }
        }
        let normal = &active * active.transpose();
        let accepted = loop {
            let mut system = normal.clone();
            for i in 0..system.nrows() {
                system[(i, i)] += damping;
            }
            let Some(y) = system.cholesky().map(|c| c.solve(&residual)) else {
                damping *= 4.0;
                continue;
            };
            let delta = active.transpose() * y;
            let mut trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(xi, d)| xi - d).collect();
            problem.project(&mut trial);
            let descent: f64 = trial
                .iter()
                .zip(&x)
                .zip(g.iter())
                .map(|((t, xi), gi)| (t - xi) * gi)
                .sum();
            if !(descent < 0.0) {
                break 'outer;
            }
            let e = evaluate(&trial, problem, false)?;
            if e.cost <= current.cost + 1e-4 * descent {
                damping = (damping / 3.0).max(1e-15);
                break trial;
            }
            damping *= 4.0;
            if damping > 1e30 {
                break 'outer;
            }
        };
        x = accepted;
        (current, residual, jac) = residual_jacobian(&x, problem)?;
        let r = record(iteration, &current);
        on_step(&r);
        iterations.push(r);
        converged = current.cost < problem.tolerance;
    }
    Ok(OptimizationTrace {
        iterations,
        best_ramp: x,
        converged,
    })
}

/// Residual `exp(-i phi_t) psi(T) - |v=0>` split into real and imaginary
/// parts, and its Jacobian with respect to the segment fields.
fn residual_jacobian(
    fields: &[f64],
    problem: &ControlProblem,
) -> Result<(Evaluation, DVector<f64>, DMatrix<f64>)> {
    problem.check(fields)?;
    let model = &problem.model;
    let tau = model.reduced_time(problem.segment_duration());
    let dim = model.dimension();
    let slope = model.reduced_slope();
    let props = fields
        .iter()
        .map(|&b| Ok(SegmentPropagator::new(build_hamiltonian(b, model)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut states = Vec::with_capacity(props.len() + 1);
    states.push(ResonanceState::ground(model).amplitudes);
    for p in &props {
        let next = p.apply(states.last().unwrap(), tau, false);
        states.push(next);
    }
    let c = Complex64::from_polar(1.0, -problem.target_phase);
    let last = states.last().unwrap();
    let mut residual = DVector::zeros(2 * dim);
    for i in 0..dim {
        let r = c * last[i]
            - if i == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
        residual[i] = r.re;
        residual[dim + i] = r.im;
    }
    // `tail` holds U_N ... U_{k+1}, built up from the end.
    let mut tail = DMatrix::<Complex64>::identity(dim, dim);
    let mut jac = DMatrix::zeros(2 * dim, props.len());
    for k in (0..props.len()).rev() {
        let p = &props[k];
        let a = p.to_eigenbasis(&states[k]);
        let q: Vec<f64> = (0..dim).map(|i| p.vectors[(0, i)]).collect();
        let t: Vec<Complex64> = (0..dim)
            .map(|i| {
                let row: Complex64 = (0..dim)
                    .map(|j| divided_difference(p.values[i], p.values[j], tau) * q[j] * a[j])
                    .sum();
                row * q[i] * slope
            })
            .collect();
        let du_psi = DVector::from_vec(p.from_eigenbasis(&t));
        let col = &tail * du_psi;
        for i in 0..dim {
            let v = c * col[i];
            jac[(i, k)] = v.re;
            jac[(dim + i, k)] = v.im;
        }
        let u = DMatrix::from_fn(dim, dim, |i, j| {
            (0..dim)
                .map(|m| {
                    Complex64::from_polar(p.vectors[(i, m)] * p.vectors[(j, m)], -p.values[m] * tau)
                })
                .sum::<Complex64>()
        });
        tail *= u;
    }
    let overlap = last[1];
    Ok((
        Evaluation {
            cost: cost_from(overlap, problem.target_phase),
            overlap,
            gradient: None,
        },
        residual,
        jac,
    ))
}

/// Options for [`transport_refinement_hook`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementOptions {
    /// Initial step applied to every knot value.
    pub initial_step: f64,
    /// Search stops once the step shrinks below this.
    pub min_step: f64,
    pub max_evaluations: usize,
}

impl Default for RefinementOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            min_step: 0.02,
            max_evaluations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub schedule: PulseSchedule,
    pub objective: f64,
    pub initial_objective: f64,
    pub evaluations: usize,
}

/// Compass search over every knot value (depths and separation) of
/// `schedule`, maximizing `objective`. Knot times are kept. Candidates that do
/// not form a valid schedule are skipped and evaluation failures count as
/// `-inf`, so the returned objective is never below the starting one.
pub fn transport_refinement_hook<F>(
    schedule: &PulseSchedule,
    options: &RefinementOptions,
    mut objective: F,
) -> Result<Refinement>
where
    F: FnMut(&PulseSchedule) -> Result<f64>,
{
    let knots = schedule.knots().to_vec();
    let n_params = 3 * knots.len();
    if n_params > 60 {
        return Err(invalid(
            "knots",
            "too many knots for a derivative-free search",
        ));
    }
    if !(options.initial_step > 0.0 && options.min_step > 0.0) {
        return Err(invalid("step", "steps must be positive"));
    }
    let build = |values: &[f64]| -> Option<PulseSchedule> {
        let ks: Vec<Knot> = knots
            .iter()
            .enumerate()
            .map(|(i, k)| Knot::new(k.t, values[3 * i], values[3 * i + 1], values[3 * i + 2]))
            .collect();
        if values.iter().any(|v| *v < 0.0) {
            return None;
        }
        PulseSchedule::new(schedule.width(), ks).ok()
    };
    let mut values: Vec<f64> = knots
        .iter()
        .flat_map(|k| [k.depth_right, k.depth_left, k.separation])
        .collect();
    let initial = objective(schedule)?;
    let mut best = initial;
    let mut evaluations = 1;
    let mut step = options.initial_step;
    'search: while step >= options.min_step {
        let mut improved = false;
        for p in 0..n_params {
            for dir in [1.0, -1.0] {
                if evaluations >= options.max_evaluations {
                    break 'search;
                }
                let mut trial = values.clone();
                trial[p] += dir * step;
                let Some(candidate) = build(&trial) else {
                    continue;
                };
                evaluations += 1;
                let f = objective(&candidate).unwrap_or(f64::NEG_INFINITY);
                if f > best {
                    best = f;
                    values = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let refined = build(&values).expect("accepted values always form a schedule");
    Ok(Refinement {
        schedule: refined,
        objective: best,
        initial_objective: initial,
        evaluations,
    })
}
