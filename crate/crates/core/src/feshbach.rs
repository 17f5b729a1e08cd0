//! Feshbach resonance coupled to the levels of a harmonic trap, and the
//! two-qubit controlled-phase gate obtained by ramping the magnetic field
//! across the resonance.
//!
//! Inside this module energies are measured in units of `hbar * nu` and times
//! in units of `1 / nu`, with the zero of energy at the trap ground level
//! `|v = 0>`. Ramps are specified in SI seconds and gauss.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::units::constants::{rb87_mass, BOHR_MAGNETON_PER_GAUSS, BOHR_RADIUS, HBAR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceModel {
    /// Resonant field in gauss.
    pub b0: f64,
    /// Resonance width in gauss.
    pub width: f64,
    /// Slope of the bound-state energy in J/G.
    pub slope: f64,
    /// Background scattering length in metres.
    pub background_length: f64,
    /// Relative-motion trap frequency in rad/s.
    pub nu: f64,
    /// Number of trap levels kept in the basis.
    pub n_levels: usize,
    /// Transverse to longitudinal level spacing ratio. Carried along for the
    /// record only, the isotropic couplings do not depend on it.
    pub gamma: f64,
    /// Atomic mass in kg.
    pub mass: f64,
}

impl Default for ResonanceModel {
    /// The 685 G resonance of Rb-87 in a 25 kHz trap.
    fn default() -> Self {
        Self {
            b0: 685.0,
            width: 0.016,
            slope: BOHR_MAGNETON_PER_GAUSS,
            background_length: 100.0 * BOHR_RADIUS,
            nu: TAU * 25.0e3,
            n_levels: 20,
            gamma: 4.0,
            mass: rb87_mass(),
        }
    }
}

impl ResonanceModel {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.b0,
            self.width,
            self.slope,
            self.background_length,
            self.nu,
            self.gamma,
            self.mass,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(invalid("resonance", "all parameters must be finite"));
        }
        if self.width <= 0.0 {
            return Err(invalid(
                "width",
                format!("must be positive, got {}", self.width),
            ));
        }
        if self.nu <= 0.0 {
            return Err(invalid("nu", format!("must be positive, got {}", self.nu)));
        }
        if self.mass <= 0.0 {
            return Err(invalid(
                "mass",
                format!("must be positive, got {}", self.mass),
            ));
        }
        if self.n_levels == 0 {
            return Err(invalid("n_levels", "need at least one trap level"));
        }
        Ok(())
    }

    pub fn with_levels(self, n_levels: usize) -> Self {
        Self { n_levels, ..self }
    }

    /// Background scattering length in trap units, `A_bg sqrt(m nu / hbar)`.
    pub fn reduced_background_length(&self) -> f64 {
        self.background_length * (self.mass * self.nu / HBAR).sqrt()
    }

    /// Width in trap units, `Delta s / (hbar nu)`.
    pub fn reduced_width(&self) -> f64 {
        self.width * self.slope / (HBAR * self.nu)
    }

    /// `d(epsilon_n)/dB` in `hbar nu` per gauss.
    pub fn reduced_slope(&self) -> f64 {
        self.slope / (HBAR * self.nu)
    }

    /// Bound-state energy `s (B - B0)` in `hbar nu`.
    pub fn detuning(&self, field: f64) -> f64 {
        self.reduced_slope() * (field - self.b0)
    }

    /// Seconds to trap time units.
    pub fn reduced_time(&self, seconds: f64) -> f64 {
        seconds * self.nu
    }

    pub fn dimension(&self) -> usize {
        self.n_levels + 1
    }
}

/// `A(B) = A_bg (1 - Delta / (B - B0))`, in metres.
pub fn scattering_length(field: f64, model: &ResonanceModel) -> Result<f64> {
    if field == model.b0 {
        return Err(Error::ResonancePole(model.b0));
    }
    // Written so that B = B0 + Delta gives exactly zero.
    Ok(model.background_length * (field - (model.b0 + model.width)) / (field - model.b0))
}

/// Bound-state energy in joules.
pub fn resonance_energy(field: f64, model: &ResonanceModel) -> f64 {
    model.slope * (field - model.b0)
}

/// Coupling of `|n>` to trap level `v`, in units of `hbar nu`.
pub fn reduced_coupling(v: usize, model: &ResonanceModel) -> Result<f64> {
    let product = model.reduced_background_length() * model.reduced_width();
    if product < 0.0 || !product.is_finite() {
        return Err(Error::UnphysicalCoupling(product));
    }
    Ok(2.0 * ((4.0 * v as f64 + 3.0).sqrt() * product / PI).sqrt())
}

/// Coupling of `|n>` to trap level `v`, in joules.
pub fn coupling(v: usize, model: &ResonanceModel) -> Result<f64> {
    Ok(reduced_coupling(v, model)? * HBAR * model.nu)
}

/// Hamiltonian in units of `hbar nu`. Index 0 is the bound state `|n>`,
/// index `v + 1` the trap level `|v>`.
pub fn build_hamiltonian(field: f64, model: &ResonanceModel) -> Result<DMatrix<f64>> {
    model.validate()?;
    let dim = model.dimension();
    let mut h = DMatrix::zeros(dim, dim);
    h[(0, 0)] = model.detuning(field);
    for v in 0..model.n_levels {
        let c = reduced_coupling(v, model)?;
        h[(v + 1, v + 1)] = v as f64;
        h[(0, v + 1)] = c;
        h[(v + 1, 0)] = c;
    }
    Ok(h)
}

/// Spectral decomposition of one constant-field segment, `exp(-i H tau)`.
#[derive(Debug, Clone)]
pub struct SegmentPropagator {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SegmentPropagator {
    pub fn new(h: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(h);
        Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    /// `Q^T psi`.
    pub fn to_eigenbasis(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = psi.len();
        (0..n)
            .map(|k| (0..n).map(|i| psi[i] * self.vectors[(i, k)]).sum())
            .collect()
    }

    /// `Q a`.
    pub fn from_eigenbasis(&self, a: &[Complex64]) -> Vec<Complex64> {
        let n = a.len();
        (0..n)
            .map(|i| (0..n).map(|k| a[k] * self.vectors[(i, k)]).sum())
            .collect()
    }

    /// `exp(-i H tau) psi`, or its adjoint when `adjoint` is set.
    pub fn apply(&self, psi: &[Complex64], tau: f64, adjoint: bool) -> Vec<Complex64> {
        let sign = if adjoint { 1.0 } else { -1.0 };
        let mut a = self.to_eigenbasis(psi);
        for (ak, &l) in a.iter_mut().zip(&self.values) {
            *ak *= Complex64::from_polar(1.0, sign * l * tau);
        }
        self.from_eigenbasis(&a)
    }

    fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite()) && self.vectors.iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampSegment {
    /// Duration in seconds.
    pub duration: f64,
    /// Field in gauss.
    pub field: f64,
}

pub fn validate_ramp(ramp: &[RampSegment]) -> Result<()> {
    if ramp.is_empty() {
        return Err(invalid("ramp", "needs at least one segment"));
    }
    for (i, s) in ramp.iter().enumerate() {
        if !(s.duration > 0.0 && s.duration.is_finite()) {
            return Err(invalid(
                "ramp",
                format!("segment {i}: duration must be positive"),
            ));
        }
        if !s.field.is_finite() {
            return Err(invalid(
                "ramp",
                format!("segment {i}: field must be finite"),
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceState {
    /// Amplitudes over `(|n>, |v=0>, ..., |v=n_levels-1>)`.
    pub amplitudes: Vec<Complex64>,
    /// Elapsed time in seconds.
    pub t: f64,
}

impl ResonanceState {
    /// Both atoms in the trap ground state.
    pub fn ground(model: &ResonanceModel) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); model.dimension()];
        amplitudes[1] = Complex64::new(1.0, 0.0);
        Self { amplitudes, t: 0.0 }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `<v=0|psi>`.
    pub fn ground_amplitude(&self) -> Complex64 {
        self.amplitudes[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GatePhaseResult {
    /// Two-particle phase in `[0, 2 pi)`.
    pub phi: f64,
    pub ground_return: f64,
    pub infidelity: f64,
}

impl GatePhaseResult {
    fn from_amplitude(amp: Complex64) -> Self {
        let ground_return = amp.norm_sqr().min(1.0);
        Self {
            phi: amp.arg().rem_euclid(TAU),
            ground_return,
            infidelity: 1.0 - ground_return,
        }
    }
}

/// One point of the gate time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateSample {
    /// Seconds.
    pub t: f64,
    pub ground_return: f64,
    /// Unwrapped phase of `<v=0|psi(t)>`.
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateEvolution {
    pub result: GatePhaseResult,
    pub state: ResonanceState,
    pub samples: Vec<GateSample>,
}

/// Evolves `psi0` through the piecewise-constant `ramp`, sampling at segment
/// boundaries.
pub fn evolve_gate(
    ramp: &[RampSegment],
    model: &ResonanceModel,
    psi0: &ResonanceState,
) -> Result<GateEvolution> {
    evolve_gate_sampled(ramp, model, psi0, 1)
}

/// Like [`evolve_gate`] but with `per_segment` samples inside each segment.
pub fn evolve_gate_sampled(
    ramp: &[RampSegment],
    model: &ResonanceModel,
    psi0: &ResonanceState,
    per_segment: usize,
) -> Result<GateEvolution> {
    validate_ramp(ramp)?;
    if psi0.amplitudes.len() != model.dimension() {
        return Err(invalid(
            "psi0",
            format!(
                "expected {} amplitudes, got {}",
                model.dimension(),
                psi0.amplitudes.len()
            ),
        ));
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(invalid("psi0", "state must be normalized"));
    }
    let per_segment = per_segment.max(1);
    let mut psi = psi0.amplitudes.clone();
    let mut t = psi0.t;
    let mut samples = Vec::with_capacity(ramp.len() * per_segment + 1);
    let mut unwrapped = psi[1].arg();
    samples.push(GateSample {
        t,
        ground_return: psi[1].norm_sqr(),
        phi: unwrapped,
    });
    for (i, seg) in ramp.iter().enumerate() {
        let prop = SegmentPropagator::new(build_hamiltonian(seg.field, model)?);
        if !prop.is_finite() {
            return Err(Error::Exponential(i));
        }
        let dt = seg.duration / per_segment as f64;
        let tau = model.reduced_time(dt);
        for _ in 0..per_segment {
            psi = prop.apply(&psi, tau, false);
            t += dt;
            let arg = psi[1].arg();
            unwrapped += (arg - unwrapped + PI).rem_euclid(TAU) - PI;
            samples.push(GateSample {
                t,
                ground_return: psi[1].norm_sqr(),
                phi: unwrapped,
            });
        }
    }
    if psi.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::Exponential(ramp.len() - 1));
    }
    Ok(GateEvolution {
        result: GatePhaseResult::from_amplitude(psi[1]),
        state: ResonanceState { amplitudes: psi, t },
        samples,
    })
}

/// Two-qubit amplitudes in the order `|00>, |01>, |10>, |11>`.
pub type TwoQubitState = [Complex64; 4];

/// Applies the controlled-phase truth table: only `|00>` picks up `exp(i phi)`.
pub fn apply_truth_table(phi: f64, state: &TwoQubitState) -> TwoQubitState {
    let mut out = *state;
    out[0] *= Complex64::from_polar(1.0, phi);
    out
}

/// The gate as a 4x4 unitary.
pub fn gate_unitary(phi: f64) -> [[Complex64; 4]; 4] {
    let mut u = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in u.iter_mut().enumerate() {
        let e = [0.0; 4];
        let mut basis = e.map(|x| Complex64::new(x, 0.0));
        basis[i] = Complex64::new(1.0, 0.0);
        let col = apply_truth_table(phi, &basis);
        row[i] = col[i];
    }
    u
}

/// Entangling power `2/9 (1 - |G1|)` from the first Makhlin invariant
/// `G1 = tr(m)^2 / (16 det U)` with `m = U_B^T U_B` in the magic basis.
pub fn entangling_power(u: &[[Complex64; 4]; 4]) -> f64 {
    let ub = DMatrix::from_fn(4, 4, |i, j| u[i][j]);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    let r = Complex64::new(s, 0.0);
    let im = Complex64::new(0.0, s);
    #[rustfmt::skip]
    let q = DMatrix::from_row_slice(4, 4, &[
        r, z, z, im,
        z, im, r, z,
        z, im, -r, z,
        r, z, z, -im,
    ]);
    let magic = q.adjoint() * ub.clone() * q;
    let m = magic.transpose() * magic;
    let g1 = m.trace().powi(2) / (16.0 * ub.determinant());
    2.0 / 9.0 * (1.0 - g1.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> ResonanceModel {
        ResonanceModel::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn default_width_is_order_unity() {
        let m = model();
        let d = m.reduced_width();
        assert!(d > 0.3 && d < 3.0, "{d}");
        let a = m.reduced_background_length();
        // 100 Bohr radii against a 68 nm oscillator length.
        assert!((a - 5.29177210903e-9 / 6.8196e-8).abs() < 1e-4, "{a}");
    }

    #[test]
    fn scattering_length_landmarks() {
        let m = model();
        assert_eq!(scattering_length(m.b0 + m.width, &m).unwrap(), 0.0);
        // 685.032 is not representable, so B - B0 carries a ~1e-11 relative error.
        let half = scattering_length(685.032, &m).unwrap();
        assert!((half - m.background_length / 2.0).abs() < 1e-10 * m.background_length);
        let far = scattering_length(m.b0 + 1000.0 * m.width, &m).unwrap();
        assert!((far / m.background_length - 1.0).abs() < 1e-3);
        assert_eq!(
            scattering_length(m.b0, &m),
            Err(Error::ResonancePole(685.0))
        );
    }

    #[test]
    fn resonance_energy_is_linear() {
        let m = model();
        assert_eq!(resonance_energy(m.b0, &m), 0.0);
        let x = 0.37;
        let r = resonance_energy(m.b0 + 2.0 * x, &m) / resonance_energy(m.b0 + x, &m);
        assert!((r - 2.0).abs() < 1e-12);
        assert!(resonance_energy(m.b0 - 0.1, &m) < 0.0);
    }

    #[test]
    fn coupling_values() {
        let m = model();
        let ratio = reduced_coupling(1, &m).unwrap() / reduced_coupling(0, &m).unwrap();
        assert!((ratio - (7.0f64 / 3.0).powf(0.25)).abs() < 1e-12);
        // Hand evaluation with a_bg = 0.05 and delta_n = 0.8.
        let hand = ResonanceModel {
            background_length: 0.05 / (m.mass * m.nu / HBAR).sqrt(),
            slope: 0.8 * HBAR * m.nu / m.width,
            ..m
        };
        let v0 = reduced_coupling(0, &hand).unwrap();
        assert!((v0 - 2.0 * (3f64.sqrt() * 0.04 / PI).sqrt()).abs() < 1e-12);
        assert!((coupling(0, &hand).unwrap() / (HBAR * m.nu) - v0).abs() < 1e-12);
        let doubled = ResonanceModel {
            slope: 2.0 * hand.slope,
            ..hand
        };
        for v in 0..5 {
            let r = reduced_coupling(v, &doubled).unwrap() / reduced_coupling(v, &hand).unwrap();
            assert!((r - 2f64.sqrt()).abs() < 1e-12);
        }
        let negative = ResonanceModel {
            slope: -m.slope,
            ..m
        };
        assert!(matches!(
            reduced_coupling(0, &negative),
            Err(Error::UnphysicalCoupling(_))
        ));
    }

    #[test]
    fn hamiltonian_structure() {
        let m = model();
        let h = build_hamiltonian(685.1, &m).unwrap();
        assert_eq!(h.nrows(), 21);
        assert_eq!(h.clone(), h.transpose());
        assert!((h[(0, 0)] - m.detuning(685.1)).abs() < 1e-15);
        assert_eq!(h[(3, 3)], 2.0);
        assert_eq!(h[(2, 3)], 0.0);
        let decoupled = ResonanceModel { slope: 0.0, ..m };
        let h = build_hamiltonian(685.1, &decoupled).unwrap();
        assert!(h.iter().enumerate().all(|(k, x)| k % 22 == 0 || *x == 0.0));
    }

    #[test]
    fn two_level_avoided_crossing() {
        let m = model().with_levels(1);
        let v0 = reduced_coupling(0, &m).unwrap();
        for field in [684.9, 684.99, 685.0, 685.01, 685.2] {
            let h = build_hamiltonian(field, &m).unwrap();
            let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
            e.sort_by(f64::total_cmp);
            let eps = m.detuning(field);
            let mid = eps / 2.0;
            let half_gap = (mid * mid + v0 * v0).sqrt();
            assert!((e[0] - (mid - half_gap)).abs() < 1e-10);
            assert!((e[1] - (mid + half_gap)).abs() < 1e-10);
        }
    }

    fn ramp(fields: &[f64], duration: f64) -> Vec<RampSegment> {
        fields
            .iter()
            .map(|&field| RampSegment {
                duration: duration / fields.len() as f64,
                field,
            })
            .collect()
    }

    #[test]
    fn decoupled_gate_is_trivial() {
        let m = ResonanceModel {
            slope: 0.0,
            ..model()
        };
        let r = ramp(&[685.3, 684.9, 685.0, 685.4], 2e-4);
        let out = evolve_gate(&r, &m, &ResonanceState::ground(&m)).unwrap();
        assert_eq!(out.result.infidelity, 0.0);
        assert_eq!(out.result.phi, 0.0);
    }

    #[test]
    fn far_detuned_gate_is_nearly_identity() {
        let m = model();
        let r = ramp(&[m.b0 + 1e4 * m.width], 1e-5);
        let out = evolve_gate(&r, &m, &ResonanceState::ground(&m)).unwrap();
        assert!(out.result.infidelity < 1e-4);
        let phi = out.result.phi;
        assert!(phi.min(TAU - phi) < 0.05, "{phi}");
    }

    #[test]
    fn evolution_is_unitary_and_sampled() {
        let m = model();
        let r = ramp(&[685.8, 685.2, 684.95, 685.05, 685.8], 3e-4);
        let out = evolve_gate_sampled(&r, &m, &ResonanceState::ground(&m), 4).unwrap();
        assert!((out.state.norm() - 1.0).abs() < 1e-10);
        assert_eq!(out.samples.len(), 21);
        assert!((out.samples[20].t - 3e-4).abs() < 1e-18);
        let last = out.samples[20];
        assert!((last.ground_return - out.result.ground_return).abs() < 1e-15);
        assert!(((last.phi - out.result.phi) / TAU).fract().abs() < 1e-12);
        assert!(out
            .samples
            .iter()
            .all(|s| (0.0..=1.0 + 1e-12).contains(&s.ground_return)));
    }

    #[test]
    fn bad_inputs_rejected() {
        let m = model();
        let psi = ResonanceState::ground(&m);
        assert!(evolve_gate(&[], &m, &psi).is_err());
        let r = [RampSegment {
            duration: -1.0,
            field: 685.0,
        }];
        assert!(evolve_gate(&r, &m, &psi).is_err());
        let r = ramp(&[685.1], 1e-5);
        assert!(evolve_gate(&r, &m.with_levels(5), &psi).is_err());
        assert!(ResonanceModel { width: 0.0, ..m }.validate().is_err());
        assert!(m.with_levels(0).validate().is_err());
    }

    #[test]
    fn truth_table() {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let out = apply_truth_table(PI, &[one, zero, zero, zero]);
        assert!((out[0] + one).norm() < 1e-15);
        let e11 = [zero, zero, zero, one];
        for phi in [0.0, 0.3, PI, 5.0] {
            assert_eq!(apply_truth_table(phi, &e11), e11);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let v: TwoQubitState =
                std::array::from_fn(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            assert_eq!(apply_truth_table(0.0, &v), v);
            let phi = rng.random::<f64>() * TAU;
            let out = apply_truth_table(phi, &v);
            let n_in: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            let n_out: f64 = out.iter().map(|a| a.norm_sqr()).sum();
            assert!((n_in - n_out).abs() < 1e-15);
            let back = apply_truth_table(-phi, &out);
            assert!(back.iter().zip(&v).all(|(a, b)| (a - b).norm() < 1e-15));
        }
    }

    /// Average linear entropy of `U |a>|b>` over random product states.
    fn sampled_entangling_power(u: &[[Complex64; 4]; 4], samples: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut qubit = || {
            // Uniform on the Bloch sphere.
            let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
            let p: f64 = TAU * rng.random::<f64>();
            let th = z.acos();
            [
                c((th / 2.0).cos(), 0.0),
                Complex64::from_polar((th / 2.0).sin(), p),
            ]
        };
        let mut total = 0.0;
        for _ in 0..samples {
            let a = qubit();
            let b = qubit();
            let psi = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
            let out: Vec<Complex64> = (0..4)
                .map(|i| (0..4).map(|j| u[i][j] * psi[j]).sum())
                .collect();
            // Reduced density matrix of the first qubit.
            let r00 = out[0].norm_sqr() + out[1].norm_sqr();
            let r11 = out[2].norm_sqr() + out[3].norm_sqr();
            let r01 = out[0] * out[2].conj() + out[1] * out[3].conj();
            let purity = r00 * r00 + r11 * r11 + 2.0 * r01.norm_sqr();
            total += 1.0 - purity;
        }
        total / samples as f64
    }

    #[test]
    fn controlled_z_is_maximally_entangling() {
        let ep = entangling_power(&gate_unitary(PI));
        assert!((ep - 2.0 / 9.0).abs() < 1e-12, "{ep}");
        assert!(entangling_power(&gate_unitary(0.0)).abs() < 1e-12);
        for phi in [PI, PI / 2.0, 0.7] {
            let u = gate_unitary(phi);
            let sampled = sampled_entangling_power(&u, 40_000);
            assert!(
                (entangling_power(&u) - sampled).abs() < 0.01,
                "{phi}: {sampled}"
            );
        }
    }
}
