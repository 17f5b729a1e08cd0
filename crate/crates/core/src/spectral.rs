//! Instantaneous eigenpairs of the finite-difference Hamiltonian.
//!
//! `H = -d^2/dx^2 + V` is discretized with second-order central differences and
//! hard walls at the grid ends, giving a symmetric tridiagonal matrix. The
//! lowest eigenvalues come from Sturm-sequence bisection and the vectors from
//! inverse iteration, reorthogonalized inside clusters of close eigenvalues.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::potential::DoubleWellParams;
use crate::units::SpatialGrid;

/// Symmetric tridiagonal matrix with a constant off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: f64,
}

impl Tridiagonal {
    /// Finite-difference Hamiltonian for potential samples `v` on `grid`.
    pub fn hamiltonian(grid: &SpatialGrid, v: &[f64]) -> Self {
        let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
        Self {
            diag: v.iter().map(|&vi| 2.0 * inv_h2 + vi).collect(),
            off: -inv_h2,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off * x[i + 1];
            }
            out[i] = acc;
        }
    }

    fn gershgorin(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |m, &d| m.min(d)) - r;
        let hi = self.diag.iter().fold(f64::NEG_INFINITY, |m, &d| m.max(d)) + r;
        (lo, hi)
    }

    fn norm(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let b2 = self.off * self.off;
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = 0.0;
        for i in 0..self.len() {
            q = if i == 0 {
                self.diag[0] - x
            } else {
                self.diag[i] - x - b2 / q
            };
            if q.abs() < tiny {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue by bisection.
    fn eigenvalue(&self, index: usize, lo: f64, hi: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T - shift) x = rhs` in place with partial pivoting.
    fn shifted_solve(&self, shift: f64, rhs: &mut [f64], floor: f64) {
        let n = self.len();
        // Rows after elimination: u0 (diag), u1 (first super), u2 (second super).
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        let b = self.off;
        let mut cur_d = self.diag[0] - shift;
        let mut cur_u = if n > 1 { b } else { 0.0 };
        for i in 0..n - 1 {
            let next_l = b;
            let next_d = self.diag[i + 1] - shift;
            let next_u = if i + 2 < n { b } else { 0.0 };
            if cur_d.abs() >= next_l.abs() {
                let piv = if cur_d.abs() < floor {
                    floor.copysign(cur_d + 0.0)
                } else {
                    cur_d
                };
                let m = next_l / piv;
                u0[i] = piv;
                u1[i] = cur_u;
                u2[i] = 0.0;
                mult[i] = m;
                cur_d = next_d - m * cur_u;
                cur_u = next_u;
            } else {
                swapped[i] = true;
                let m = cur_d / next_l;
                u0[i] = next_l;
                u1[i] = next_d;
                u2[i] = next_u;
                mult[i] = m;
                cur_d = cur_u - m * next_d;
                cur_u = -m * next_u;
            }
        }
        u0[n - 1] = if cur_d.abs() < floor { floor } else { cur_d };
        for i in 0..n - 1 {
            if swapped[i] {
                rhs.swap(i, i + 1);
            }
            rhs[i + 1] -= mult[i] * rhs[i];
        }
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            if i + 1 < n {
                acc -= u1[i] * rhs[i + 1];
            }
            if i + 2 < n {
                acc -= u2[i] * rhs[i + 2];
            }
            rhs[i] = acc / u0[i];
        }
    }

    /// Lowest `k` eigenpairs with Euclidean-normalized vectors.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.len();
        if k == 0 || k > n {
            return Err(invalid("k", format!("must be in 1..={n}, got {k}")));
        }
        let (glo, ghi) = self.gershgorin();
        let norm = self.norm().max(1.0);
        let mut values = Vec::with_capacity(k);
        let mut lo = glo;
        for j in 0..k {
            let v = self.eigenvalue(j, lo, ghi);
            values.push(v);
            lo = v.min(ghi) - norm * 1e-15;
        }
        let cluster_tol = 1e-3 * norm;
        let floor = f64::EPSILON * norm;
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut cluster_start = 0;
        for j in 0..k {
            if j > 0 && values[j] - values[j - 1] > cluster_tol {
                cluster_start = j;
            }
            // Deterministic, non-symmetric start vector.
            let mut x: Vec<f64> = (0..n)
                .map(|i| {
                    1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895 * (j as f64 + 1.0)).sin()
                })
                .collect();
            normalize(&mut x);
            for _ in 0..3 {
                self.shifted_solve(values[j], &mut x, floor);
                for prev in &vectors[cluster_start..j] {
                    let dot = dot(prev, &x);
                    x.iter_mut().zip(prev).for_each(|(xi, pi)| *xi -= dot * pi);
                }
                let growth = normalize(&mut x);
                if !growth.is_finite() || growth == 0.0 {
                    return Err(Error::Eigensolver(format!(
                        "inverse iteration broke down at level {j}"
                    )));
                }
            }
            vectors.push(x);
        }
        Ok((values, vectors))
    }

    /// `||T v - lambda v|| / ||v||` in Euclidean norm.
    pub fn residual(&self, value: f64, vector: &[f64]) -> f64 {
        let mut hv = vec![0.0; vector.len()];
        self.apply(vector, &mut hv);
        let r: f64 = hv
            .iter()
            .zip(vector)
            .map(|(h, v)| (h - value * v).powi(2))
            .sum::<f64>()
            .sqrt();
        r / dot(vector, vector).sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = dot(x, x).sqrt();
    if n > 0.0 && n.is_finite() {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

/// Lowest eigenpairs of `H(t)`, grid-normalized so that `sum |psi|^2 h = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstantaneousSpectrum {
    pub t: f64,
    pub energies: Vec<f64>,
    #[serde(skip)]
    pub states: Vec<Vec<f64>>,
    #[serde(skip)]
    pub grid: SpatialGrid,
}

impl InstantaneousSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Grid inner product of two stored states.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        dot(&self.states[i], &self.states[j]) * self.grid.spacing()
    }

    /// Smallest gap between adjacent stored levels.
    pub fn min_gap(&self) -> f64 {
        self.energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Lowest `k` eigenpairs of the double well `params` on `grid`.
///
/// Signs are fixed so that each state is positive at the global potential
/// minimum, or at its largest-magnitude sample when it nearly vanishes there.
pub fn instantaneous_spectrum(
    params: &DoubleWellParams,
    grid: &SpatialGrid,
    k: usize,
    t: f64,
) -> Result<InstantaneousSpectrum> {
    let v = params.sample(grid);
    spectrum_of_potential(&v, grid, k, t)
}

pub fn spectrum_of_potential(
    v: &[f64],
    grid: &SpatialGrid,
    k: usize,
    t: f64,
) -> Result<InstantaneousSpectrum> {
    if v.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "potential has {} samples, grid {}",
            v.len(),
            grid.len()
        )));
    }
    if k >= grid.len() / 2 {
        return Err(invalid(
            "k",
            format!("{k} levels is too many for {} points", grid.len()),
        ));
    }
    let h = Tridiagonal::hamiltonian(grid, v);
    let (energies, vectors) = h.lowest_eigenpairs(k)?;
    let i_min = v
        .iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |acc, (i, &x)| if x < acc.1 { (i, x) } else { acc },
        )
        .0;
    let scale = grid.spacing().sqrt().recip();
    let states = vectors
        .into_iter()
        .map(|mut s| {
            let peak = s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let anchor = if s[i_min].abs() > 1e-3 * peak {
                s[i_min]
            } else {
                *s.iter()
                    .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
                    .unwrap()
            };
            let sign = if anchor < 0.0 { -scale } else { scale };
            s.iter_mut().for_each(|x| *x *= sign);
            s
        })
        .collect();
    Ok(InstantaneousSpectrum {
        t,
        energies,
        states,
        grid: grid.clone(),
    })
}

/// Outcome of aligning a spectrum against its predecessor in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub spectrum: InstantaneousSpectrum,
    /// Smallest `|<previous_n|current_n>|` over the tracked levels.
    pub min_overlap: f64,
    pub min_gap: f64,
}

/// Flips the sign of every state whose overlap with its predecessor is
/// negative. Fails when a state's overlap magnitude drops below `threshold`.
pub fn align_spectrum(
    previous: &InstantaneousSpectrum,
    current: InstantaneousSpectrum,
    threshold: f64,
) -> Result<Alignment> {
    if !previous.grid.same_as(&current.grid) {
        return Err(Error::GridMismatch(
            "spectra live on different grids".into(),
        ));
    }
    if previous.len() != current.len() {
        return Err(Error::GridMismatch(format!(
            "level counts differ: {} vs {}",
            previous.len(),
            current.len()
        )));
    }
    let mut current = current;
    let h = current.grid.spacing();
    let mut min_overlap = f64::INFINITY;
    for (level, (prev, cur)) in previous
        .states
        .iter()
        .zip(current.states.iter_mut())
        .enumerate()
    {
        let o = dot(prev, cur) * h;
        if o.abs() < threshold {
            return Err(Error::TrackingLost {
                level,
                overlap: o.abs(),
                threshold,
            });
        }
        if o < 0.0 {
            cur.iter_mut().for_each(|x| *x = -*x);
        }
        min_overlap = min_overlap.min(o.abs());
    }
    let min_gap = current.min_gap();
    Ok(Alignment {
        spectrum: current,
        min_overlap,
        min_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn particle_in_a_box() {
        let grid = SpatialGrid::new(-16.0, 16.0, 1024).unwrap();
        let p = DoubleWellParams::new(2.0, 0.0, 0.0, 0.0).unwrap();
        let s = instantaneous_spectrum(&p, &grid, 5, 0.0).unwrap();
        // Hard walls sit one spacing beyond the outermost points.
        let l = grid.x_max() - grid.x_min();
        for (n, e) in s.energies.iter().enumerate() {
            let exact = ((n + 1) as f64 * PI / l).powi(2);
            assert!((e - exact).abs() / exact < 0.01, "n={n}: {e} vs {exact}");
        }
    }

    #[test]
    fn orthonormal_with_small_residuals() {
        let grid = SpatialGrid::new(-30.0, 20.0, 1024).unwrap();
        let p = DoubleWellParams::new(4.0, 32.0, 29.0, 14.0).unwrap();
        let s = instantaneous_spectrum(&p, &grid, 13, 0.0).unwrap();
        let h = Tridiagonal::hamiltonian(&grid, &p.sample(&grid));
        for i in 0..s.len() {
            assert!((s.overlap(i, i) - 1.0).abs() < 1e-10);
            for j in 0..i {
                assert!(
                    s.overlap(i, j).abs() < 1e-8,
                    "<{i}|{j}> = {}",
                    s.overlap(i, j)
                );
            }
            assert!(h.residual(s.energies[i], &s.states[i]) < 1e-8);
        }
        assert!(s.energies.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn near_degenerate_pairs_stay_orthogonal() {
        // Symmetric, widely separated wells: tunnel splittings far below 1e-8.
        let grid = SpatialGrid::new(-40.0, 20.0, 1024).unwrap();
        let p = DoubleWellParams::new(3.0, 40.0, 40.0, 20.0).unwrap();
        let s = instantaneous_spectrum(&p, &grid, 6, 0.0).unwrap();
        let h = Tridiagonal::hamiltonian(&grid, &p.sample(&grid));
        for i in 0..s.len() {
            assert!(h.residual(s.energies[i], &s.states[i]) < 1e-8);
            for j in 0..i {
                assert!(s.overlap(i, j).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn splitting_shrinks_with_barrier() {
        let grid = SpatialGrid::new(-24.0, 16.0, 1024).unwrap();
        let mut last = f64::INFINITY;
        for d in [8.0, 9.0, 10.0, 11.0] {
            let p = DoubleWellParams::new(2.0, 20.0, 20.0, d).unwrap();
            let s = instantaneous_spectrum(&p, &grid, 3, 0.0).unwrap();
            let split = s.energies[1] - s.energies[0];
            assert!(split < 0.1 * (s.energies[2] - s.energies[1]));
            assert!(split < last);
            last = split;
        }
    }

    #[test]
    fn reflection_invariance() {
        // Grid symmetric about -d/2 with A = B.
        let d = 6.0;
        let grid = SpatialGrid::new(-d / 2.0 - 15.0, -d / 2.0 + 15.0, 801).unwrap();
        let p = DoubleWellParams::new(2.0, 12.0, 12.0, d).unwrap();
        let v = p.sample(&grid);
        let mirrored: Vec<f64> = v.iter().rev().copied().collect();
        let a = spectrum_of_potential(&v, &grid, 6, 0.0).unwrap();
        let b = spectrum_of_potential(&mirrored, &grid, 6, 0.0).unwrap();
        for (x, y) in a.energies.iter().zip(&b.energies) {
            assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
        }
    }

    #[test]
    fn alignment_restores_sign() {
        let grid = SpatialGrid::new(-30.0, 20.0, 512).unwrap();
        let p = DoubleWellParams::new(4.0, 32.0, 29.0, 14.0).unwrap();
        let s = instantaneous_spectrum(&p, &grid, 4, 0.0).unwrap();
        let same = align_spectrum(&s, s.clone(), 0.5).unwrap();
        assert_eq!(same.spectrum, s);
        assert!((same.min_overlap - 1.0).abs() < 1e-10);
        let mut flipped = s.clone();
        flipped.states[2].iter_mut().for_each(|x| *x = -*x);
        let fixed = align_spectrum(&s, flipped, 0.5).unwrap();
        assert_eq!(fixed.spectrum.states[2], s.states[2]);
    }

    #[test]
    fn alignment_detects_lost_tracking() {
        let grid = SpatialGrid::new(-30.0, 20.0, 512).unwrap();
        let p = DoubleWellParams::new(4.0, 32.0, 29.0, 14.0).unwrap();
        let s = instantaneous_spectrum(&p, &grid, 4, 0.0).unwrap();
        let mut swapped = s.clone();
        swapped.states.swap(1, 2);
        assert!(matches!(
            align_spectrum(&s, swapped, 0.5),
            Err(Error::TrackingLost { level: 1, .. })
        ));
        let other = SpatialGrid::new(-30.0, 20.0, 513).unwrap();
        let q = instantaneous_spectrum(&p, &other, 4, 0.0).unwrap();
        assert!(matches!(
            align_spectrum(&s, q, 0.5),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn rejects_bad_level_count() {
        let grid = SpatialGrid::new(-5.0, 5.0, 20).unwrap();
        let p = DoubleWellParams::new(1.0, 1.0, 0.0, 0.0).unwrap();
        assert!(instantaneous_spectrum(&p, &grid, 0, 0.0).is_err());
        assert!(instantaneous_spectrum(&p, &grid, 15, 0.0).is_err());
    }
}
