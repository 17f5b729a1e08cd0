//! Crank-Nicolson (Cayley) propagation of the time-dependent Schrodinger
//! equation and the occupation/fidelity bookkeeping for the transport run.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pulse::{NoiseSpec, PulseSchedule};
use crate::spectral::{align_spectrum, instantaneous_spectrum, InstantaneousSpectrum, Tridiagonal};
use crate::units::{SpatialGrid, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtomLabel {
    /// The atom carried from the left to the right well.
    Moving,
    /// The atom that stays in the right-well ground state.
    Register,
}

/// Complex wavefunction samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionState {
    pub amplitudes: Vec<Complex64>,
    pub t: f64,
    pub label: AtomLabel,
}

impl WavefunctionState {
    pub fn from_real(values: &[f64], t: f64, label: AtomLabel) -> Self {
        Self {
            amplitudes: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            t,
            label,
        }
    }

    pub fn norm(&self, grid: &SpatialGrid) -> f64 {
        norm(&self.amplitudes, grid.spacing())
    }

    /// `<self|other>` with grid quadrature.
    pub fn inner(&self, other: &WavefunctionState, grid: &SpatialGrid) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * grid.spacing()
    }

    pub fn conjugated(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a.conj()).collect(),
            ..self.clone()
        }
    }
}

fn norm(psi: &[Complex64], h: f64) -> f64 {
    (psi.iter().map(|a| a.norm_sqr()).sum::<f64>() * h).sqrt()
}

/// `P_n = |<psi_n|psi>|^2` for every level stored in `spectrum`.
pub fn occupations(psi: &WavefunctionState, spectrum: &InstantaneousSpectrum) -> Result<Vec<f64>> {
    if psi.amplitudes.len() != spectrum.grid.len() {
        return Err(Error::GridMismatch(format!(
            "state has {} samples, spectrum grid {}",
            psi.amplitudes.len(),
            spectrum.grid.len()
        )));
    }
    let h = spectrum.grid.spacing();
    Ok(spectrum
        .states
        .iter()
        .map(|phi| {
            let amp: Complex64 = phi.iter().zip(&psi.amplitudes).map(|(p, a)| a * *p).sum();
            (amp * h).norm_sqr()
        })
        .collect())
}

/// One Cayley step for several wavefunctions sharing the same Hamiltonian.
///
/// Solves `(1 + i dt/2 (H - E)) psi' = (1 - i dt/2 (H - E)) psi` and multiplies
/// by `exp(-i E dt)`, where `E` is a reference energy that keeps the Cayley
/// phase error small for deep potentials.
pub struct CrankNicolson {
    scratch_c: Vec<Complex64>,
    scratch_denom: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

impl CrankNicolson {
    pub fn new(n: usize) -> Self {
        Self {
            scratch_c: vec![Complex64::new(0.0, 0.0); n],
            scratch_denom: vec![Complex64::new(0.0, 0.0); n],
            rhs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn step(
        &mut self,
        h: &Tridiagonal,
        reference: f64,
        dt: f64,
        states: &mut [&mut Vec<Complex64>],
    ) -> Result<()> {
        let n = h.len();
        let half = Complex64::new(0.0, 0.5 * dt);
        let off = half * h.off;
        // Forward elimination of the shared left-hand side.
        let diag = |i: usize| Complex64::new(1.0, 0.0) + half * (h.diag[i] - reference);
        self.scratch_denom[0] = diag(0);
        self.scratch_c[0] = off / self.scratch_denom[0];
        for i in 1..n {
            let denom = diag(i) - off * self.scratch_c[i - 1];
            self.scratch_denom[i] = denom;
            self.scratch_c[i] = off / denom;
        }
        let phase = Complex64::from_polar(1.0, -reference * dt);
        for psi in states.iter_mut() {
            for i in 0..n {
                let mut r = (Complex64::new(1.0, 0.0) - half * (h.diag[i] - reference)) * psi[i];
                if i > 0 {
                    r -= off * psi[i - 1];
                }
                if i + 1 < n {
                    r -= off * psi[i + 1];
                }
                self.rhs[i] = r;
            }
            self.rhs[0] /= self.scratch_denom[0];
            for i in 1..n {
                let prev = self.rhs[i - 1];
                self.rhs[i] = (self.rhs[i] - off * prev) / self.scratch_denom[i];
            }
            psi[n - 1] = self.rhs[n - 1];
            for i in (0..n - 1).rev() {
                psi[i] = self.rhs[i] - self.scratch_c[i] * psi[i + 1];
            }
            if !psi[0].re.is_finite() || !psi[n / 2].re.is_finite() {
                return Err(Error::LinearSolve {
                    step: 0,
                    reason: "non-finite amplitudes".into(),
                });
            }
            psi.iter_mut().for_each(|a| *a *= phase);
        }
        Ok(())
    }
}

/// Output step indices: `n_out` evenly spaced samples plus `t = 0`.
pub fn output_steps(n_steps: usize, n_out: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..=n_out)
        .map(|j| ((j as f64) * n_steps as f64 / n_out as f64).round() as usize)
        .collect();
    v.dedup();
    v
}

/// Propagates several initial states through `schedule`, calling `observe`
/// at every step listed in `output`. Returns the largest norm drift seen.
pub fn propagate_many<F>(
    states: &mut [WavefunctionState],
    schedule: &PulseSchedule,
    grid: &SpatialGrid,
    tg: &TimeGrid,
    output: &[usize],
    mut observe: F,
) -> Result<f64>
where
    F: FnMut(usize, f64, &[WavefunctionState]) -> Result<()>,
{
    if (schedule.t_final() - tg.t_final()).abs() > 1e-9 * tg.t_final() {
        return Err(invalid(
            "time grid",
            format!(
                "duration {} differs from schedule duration {}",
                tg.t_final(),
                schedule.t_final()
            ),
        ));
    }
    for s in states.iter() {
        if s.amplitudes.len() != grid.len() {
            return Err(Error::GridMismatch(
                "initial state does not match grid".into(),
            ));
        }
    }
    let dt = tg.dt();
    let h = grid.spacing();
    let mut cn = CrankNicolson::new(grid.len());
    let mut max_drift = 0.0f64;
    let mut out_iter = output.iter().peekable();
    if out_iter.peek() == Some(&&0) {
        out_iter.next();
        observe(0, 0.0, states)?;
    }
    for step in 0..tg.n_steps() {
        let t_mid = (step as f64 + 0.5) * dt;
        let params = schedule.sample(t_mid.min(tg.t_final()))?;
        let v = params.sample(grid);
        let reference = v.iter().copied().fold(f64::INFINITY, f64::min);
        let ham = Tridiagonal::hamiltonian(grid, &v);
        let mut refs: Vec<&mut Vec<Complex64>> =
            states.iter_mut().map(|s| &mut s.amplitudes).collect();
        cn.step(&ham, reference, dt, &mut refs)
            .map_err(|e| match e {
                Error::LinearSolve { reason, .. } => Error::LinearSolve { step, reason },
                other => other,
            })?;
        let t = tg.time(step + 1);
        for s in states.iter_mut() {
            s.t = t;
            max_drift = max_drift.max((norm(&s.amplitudes, h) - 1.0).abs());
        }
        if out_iter.peek() == Some(&&(step + 1)) {
            out_iter.next();
            observe(step + 1, t, states)?;
        }
    }
    Ok(max_drift)
}

/// Propagates one state and returns it at `n_out` evenly spaced times
/// (plus the initial state).
pub fn propagate(
    psi0: &WavefunctionState,
    schedule: &PulseSchedule,
    grid: &SpatialGrid,
    tg: &TimeGrid,
    n_out: usize,
) -> Result<Vec<WavefunctionState>> {
    let steps = output_steps(tg.n_steps(), n_out.max(1));
    let mut states = vec![psi0.clone()];
    let mut out = Vec::with_capacity(steps.len());
    propagate_many(&mut states, schedule, grid, tg, &steps, |_, _, s| {
        out.push(s[0].clone());
        Ok(())
    })?;
    Ok(out)
}

/// Knobs of a transport run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportOptions {
    /// Highest tracked level index (levels `0..=highest_level`).
    pub highest_level: usize,
    /// Number of evenly spaced output samples after `t = 0`.
    pub n_out: usize,
    /// Levels from this index up count as leakage out of the 1D model.
    pub leakage_level: usize,
    /// Minimum overlap between consecutive eigenvectors, `0` to disable.
    pub tracking_threshold: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self {
            highest_level: 12,
            n_out: 200,
            leakage_level: 8,
            tracking_threshold: 0.0,
        }
    }
}

/// Default spatial grid for a schedule: from 24 `a` left of the farthest left
/// well to 24 `a` right of the right well.
pub fn transport_grid(schedule: &PulseSchedule, n_points: usize) -> Result<SpatialGrid> {
    SpatialGrid::new(-schedule.max_separation() - 24.0, 24.0, n_points)
}

/// Grid points and time step used by default for transport runs.
pub const DEFAULT_GRID_POINTS: usize = 1024;
pub const DEFAULT_TIME_STEP: f64 = 0.05;

/// Level of the moving atom (second excited) and of the register atom.
pub const MOVING_LEVEL: usize = 2;
pub const REGISTER_LEVEL: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportReport {
    pub times: Vec<f64>,
    /// Instantaneous energies at every output time.
    pub energies: Vec<Vec<f64>>,
    /// `P_n^M(t)` rows, one per output time.
    pub moving: Vec<Vec<f64>>,
    /// `P_n^R(t)` rows.
    pub register: Vec<Vec<f64>>,
    pub fidelity_moving: f64,
    pub fidelity_register: f64,
    pub min_fidelity_moving: f64,
    pub min_fidelity_register: f64,
    pub max_high_state_occupation: f64,
    /// Largest `1 - sum_n P_n` over both atoms and all output times.
    pub max_incompleteness: f64,
    pub max_norm_drift: f64,
    /// Smallest gap between the moving level and its neighbours.
    pub min_moving_gap: f64,
    /// Smallest overlap between consecutive aligned eigenvectors.
    pub min_tracking_overlap: f64,
}

/// Transports the moving atom (`psi_2(x, 0)`) and the register atom
/// (`psi_0(x, 0)`) through `schedule`, optionally perturbed by `noise`.
pub fn run_transport(
    schedule: &PulseSchedule,
    grid: &SpatialGrid,
    tg: &TimeGrid,
    noise: Option<NoiseSpec>,
    options: &TransportOptions,
) -> Result<TransportReport> {
    let levels = options.highest_level + 1;
    if levels <= MOVING_LEVEL + 1 {
        return Err(invalid("highest_level", "must track at least levels 0..=3"));
    }
    let schedule = match noise {
        Some(n) => schedule.perturbed(n)?,
        None => schedule.clone(),
    };
    let s0 = instantaneous_spectrum(&schedule.sample(0.0)?, grid, levels, 0.0)?;
    let mut states = vec![
        WavefunctionState::from_real(&s0.states[MOVING_LEVEL], 0.0, AtomLabel::Moving),
        WavefunctionState::from_real(&s0.states[REGISTER_LEVEL], 0.0, AtomLabel::Register),
    ];
    let steps = output_steps(tg.n_steps(), options.n_out);
    let mut report = TransportReport {
        times: Vec::with_capacity(steps.len()),
        energies: Vec::with_capacity(steps.len()),
        moving: Vec::with_capacity(steps.len()),
        register: Vec::with_capacity(steps.len()),
        fidelity_moving: 0.0,
        fidelity_register: 0.0,
        min_fidelity_moving: 1.0,
        min_fidelity_register: 1.0,
        max_high_state_occupation: 0.0,
        max_incompleteness: 0.0,
        max_norm_drift: 0.0,
        min_moving_gap: f64::INFINITY,
        min_tracking_overlap: 1.0,
    };
    let mut previous: Option<InstantaneousSpectrum> = None;
    let drift = propagate_many(&mut states, &schedule, grid, tg, &steps, |_, t, s| {
        let spectrum = if t == 0.0 {
            s0.clone()
        } else {
            instantaneous_spectrum(&schedule.sample(t)?, grid, levels, t)?
        };
        let spectrum = match previous.take() {
            Some(prev) => {
                let aligned = align_spectrum(&prev, spectrum, options.tracking_threshold)?;
                report.min_tracking_overlap = report.min_tracking_overlap.min(aligned.min_overlap);
                aligned.spectrum
            }
            None => spectrum,
        };
        let pm = occupations(&s[0], &spectrum)?;
        let pr = occupations(&s[1], &spectrum)?;
        let e = &spectrum.energies;
        report.min_moving_gap = report
            .min_moving_gap
            .min(e[MOVING_LEVEL + 1] - e[MOVING_LEVEL])
            .min(e[MOVING_LEVEL] - e[MOVING_LEVEL - 1]);
        report.min_fidelity_moving = report.min_fidelity_moving.min(pm[MOVING_LEVEL]);
        report.min_fidelity_register = report.min_fidelity_register.min(pr[REGISTER_LEVEL]);
        let high: f64 = pm.iter().skip(options.leakage_level).sum();
        report.max_high_state_occupation = report.max_high_state_occupation.max(high);
        for p in [&pm, &pr] {
            report.max_incompleteness = report.max_incompleteness.max(1.0 - p.iter().sum::<f64>());
        }
        report.times.push(t);
        report.energies.push(e.clone());
        report.moving.push(pm);
        report.register.push(pr);
        previous = Some(spectrum);
        Ok(())
    })?;
    report.max_norm_drift = drift;
    report.fidelity_moving = report.moving.last().map_or(0.0, |p| p[MOVING_LEVEL]);
    report.fidelity_register = report.register.last().map_or(0.0, |p| p[REGISTER_LEVEL]);
    Ok(report)
}
