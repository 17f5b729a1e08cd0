//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use holotrap::feshbach::{build_hamiltonian, reduced_coupling, scattering_length, ResonanceModel};
use holotrap::optctrl::{cost, gradient, optimize, ControlProblem};
use holotrap::potential::DoubleWellParams;
use holotrap::propagator::{
    run_transport, transport_grid, TransportOptions, TransportReport, DEFAULT_GRID_POINTS,
    DEFAULT_TIME_STEP,
};
use holotrap::pulse::{default_transport_schedule, NoiseSpec};
use holotrap::spectral::{spectrum_of_potential, Tridiagonal};
use holotrap::units::{QuantityKind, SpatialGrid, TimeGrid, UnitSystem};
use holotrap_cli::{load_config, run, RunOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn transport_at(t_final: f64, dt: f64, noise: Option<NoiseSpec>) -> TransportReport {
    let schedule = default_transport_schedule(t_final).unwrap();
    let grid = transport_grid(&schedule, DEFAULT_GRID_POINTS).unwrap();
    let tg = TimeGrid::with_step(t_final, dt).unwrap();
    run_transport(&schedule, &grid, &tg, noise, &TransportOptions::default()).unwrap()
}

struct Baseline {
    report: TransportReport,
    seconds: f64,
}

fn transport_fidelity(b: &Baseline) -> Outcome {
    let r = &b.report;
    let pass = r.fidelity_moving >= 0.99 && r.fidelity_register >= 0.999 && b.seconds <= 60.0;
    outcome(
        pass,
        format!(
            "F_M = {:.6}, F_R = {:.7}, runtime {:.1} s; refinement target F_M >= 0.995 met by the default: {}",
            r.fidelity_moving,
            r.fidelity_register,
            b.seconds,
            r.fidelity_moving >= 0.995
        ),
    )
}

fn adiabatic_ordering(b: &Baseline) -> Outcome {
    let durations = [250.0, 350.0, 400.0, 500.0, 1000.0, 5000.0];
    let fidelities: Vec<f64> = durations
        .iter()
        .map(|&t| {
            if t == 500.0 {
                b.report.fidelity_moving
            } else {
                transport_at(t, DEFAULT_TIME_STEP, None).fidelity_moving
            }
        })
        .collect();
    let pass = fidelities.windows(2).all(|w| w[1] >= w[0]);
    let listing: Vec<String> = durations
        .iter()
        .zip(&fidelities)
        .map(|(t, f)| format!("T={t}: {f:.6}"))
        .collect();
    outcome(pass, listing.join(", "))
}

fn noise_robustness(b: &Baseline) -> Outcome {
    let units = UnitSystem::rubidium87(100.0e3).unwrap();
    let omega = TAU / units.from_si(1.0e-3, QuantityKind::Time);
    let dd = units.from_si(1.0e-9, QuantityKind::Length);
    let f0 = b.report.fidelity_moving;
    let run = |n: NoiseSpec| transport_at(500.0, DEFAULT_TIME_STEP, Some(n)).fidelity_moving;
    let f_dd = run(NoiseSpec::new(dd, 0.0, 0.0, omega).unwrap());
    let f_da = run(NoiseSpec::new(0.0, 0.1, 0.0, omega).unwrap());
    let f_cm = run(NoiseSpec::new(0.0, 10.0, 10.0, omega).unwrap());
    let (loss_dd, loss_da, loss_cm) = (f0 - f_dd, f0 - f_da, f0 - f_cm);
    let pass = (f_cm - f0).abs() < 0.005
        && loss_dd > 0.0
        && loss_da > 0.0
        && f_dd >= 0.99
        && f_da >= 0.99
        && loss_cm < loss_dd.min(loss_da);
    outcome(
        pass,
        format!(
            "F_M loss: common {loss_cm:.2e}, separation {loss_dd:.2e}, depth {loss_da:.2e}; F_M = {f_dd:.6} / {f_da:.6} / {f_cm:.6}"
        ),
    )
}

fn model_self_check(b: &Baseline) -> Outcome {
    let high = b.report.max_high_state_occupation;
    outcome(high < 1e-6, format!("max sum of P_n (n >= 8) = {high:.2e}"))
}

fn numerical_integrity(b: &Baseline) -> Outcome {
    let r = &b.report;
    let half = transport_at(500.0, DEFAULT_TIME_STEP / 2.0, None);
    let change = (half.fidelity_moving - r.fidelity_moving).abs();
    let schedule = default_transport_schedule(500.0).unwrap();
    let grid = transport_grid(&schedule, DEFAULT_GRID_POINTS).unwrap();
    let mut residual = 0.0f64;
    for j in 0..=20 {
        let p = schedule.sample(500.0 * j as f64 / 20.0).unwrap();
        let h = Tridiagonal::hamiltonian(&grid, &p.sample(&grid));
        let (values, vectors) = h.lowest_eigenpairs(13).unwrap();
        for (e, v) in values.iter().zip(&vectors) {
            residual = residual.max(h.residual(*e, v));
        }
    }
    let pass =
        r.max_norm_drift < 1e-9 && residual < 1e-8 && change < 1e-4 && r.max_incompleteness < 1e-5;
    outcome(
        pass,
        format!(
            "norm drift {:.1e}, residual {residual:.1e}, dt-halving change {change:.1e}, incompleteness {:.1e}",
            r.max_norm_drift, r.max_incompleteness
        ),
    )
}

/// `psi'' = (V - E) psi` integrated with RK4 from deep in the left barrier to
/// the well centre. Returns `psi(0)` or `psi'(0)`.
fn shoot(v: &dyn Fn(f64) -> f64, e: f64, x0: f64, steps: usize, odd: bool) -> f64 {
    let h = -x0 / steps as f64;
    let f = |x: f64, y: [f64; 2]| [y[1], (v(x) - e) * y[0]];
    let mut y = [1e-30, 1e-30 * (v(x0) - e).max(0.0).sqrt()];
    let mut x = x0;
    for _ in 0..steps {
        let k1 = f(x, y);
        let k2 = f(
            x + h / 2.0,
            [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]],
        );
        let k3 = f(
            x + h / 2.0,
            [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]],
        );
        let k4 = f(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        x += h;
        let scale = y[0].abs().max(y[1].abs());
        if scale > 1e100 {
            y = [y[0] / scale, y[1] / scale];
        }
    }
    let scale = y[0].abs().max(y[1].abs());
    if odd {
        y[0] / scale
    } else {
        y[1] / scale
    }
}

/// Lowest `count` roots of the parity-matched shooting function.
fn shooting_levels(v: &dyn Fn(f64) -> f64, e_min: f64, odd: bool, count: usize) -> Vec<f64> {
    let (x0, steps) = (-40.0, 40_000);
    let mut roots = Vec::new();
    let mut e = e_min + 1e-6;
    let mut prev = shoot(v, e, x0, steps, odd);
    while roots.len() < count {
        let next_e = e + 0.05;
        let next = shoot(v, next_e, x0, steps, odd);
        if prev.signum() != next.signum() {
            let (mut lo, mut hi, mut flo) = (e, next_e, prev);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = shoot(v, mid, x0, steps, odd);
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        e = next_e;
        prev = next;
    }
    roots
}

fn spectral_oracle() -> Outcome {
    let width = 200.0f64.sqrt();
    let depth = DoubleWellParams::calibrated_depth(width);
    let params = DoubleWellParams::new(width, depth, 0.0, 0.0).unwrap();
    let grid = SpatialGrid::new(-40.0, 40.0, 2048).unwrap();
    let spectrum = spectrum_of_potential(&params.sample(&grid), &grid, 4, 0.0).unwrap();
    let v = |x: f64| -depth * (-x * x / (2.0 * width * width)).exp();
    let even = shooting_levels(&v, -depth, false, 2);
    let odd = shooting_levels(&v, -depth, true, 2);
    let oracle = [even[0], odd[0], even[1], odd[1]];
    let worst = spectrum
        .energies
        .iter()
        .zip(&oracle)
        .map(|(e, o)| ((e - o) / o).abs())
        .fold(0.0f64, f64::max);
    outcome(
        worst < 1e-3,
        format!(
            "grid {:?} vs shooting {:?}, worst relative error {worst:.1e}",
            spectrum
                .energies
                .iter()
                .map(|e| format!("{e:.5}"))
                .collect::<Vec<_>>(),
            oracle.iter().map(|e| format!("{e:.5}")).collect::<Vec<_>>()
        ),
    )
}

fn gate_optimization() -> Outcome {
    let problem = ControlProblem::desk_scale(ResonanceModel::default()).unwrap();
    let start = Instant::now();
    let trace = optimize(&problem).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    let best = trace.best();
    let monotone = trace.iterations.windows(2).all(|w| w[1].cost <= w[0].cost);
    let pass = best.infidelity <= 1e-4
        && best.phase_error < 1e-3
        && best.iteration <= 500
        && monotone
        && seconds <= 120.0
        && problem.model.n_levels == 20
        && problem.n_segments == 64;
    outcome(
        pass,
        format!(
            "infidelity {:.2e}, |phi - pi| {:.1e}, {} iterations, monotone {monotone}, {seconds:.1} s",
            best.infidelity, best.phase_error, best.iteration
        ),
    )
}

fn gradient_check() -> Outcome {
    let problem = ControlProblem::desk_scale(ResonanceModel::default()).unwrap();
    let (lo, hi) = problem.bounds;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let x: Vec<f64> = (0..problem.n_segments)
            .map(|_| rng.random_range(lo + 2.0 * h..hi - 2.0 * h))
            .collect();
        let g = gradient(&x, &problem).unwrap();
        let mut err = 0.0;
        let mut norm = 0.0;
        for k in 0..x.len() {
            let mut up = x.clone();
            let mut down = x.clone();
            up[k] += h;
            down[k] -= h;
            let fd = (cost(&up, &problem).unwrap() - cost(&down, &problem).unwrap()) / (2.0 * h);
            err += (g[k] - fd).powi(2);
            norm += fd * fd;
        }
        worst = worst.max((err / norm).sqrt());
    }
    outcome(
        worst < 1e-5,
        format!("worst relative error {worst:.1e} over 10 ramps"),
    )
}

fn closed_forms() -> Outcome {
    let model = ResonanceModel::default();
    let zero = scattering_length(model.b0 + model.width, &model).unwrap();
    let ratio = reduced_coupling(1, &model).unwrap() / reduced_coupling(0, &model).unwrap();
    let ratio_err = (ratio - (7.0f64 / 3.0).powf(0.25)).abs();
    let two = model.with_levels(1);
    let mut worst = 0.0f64;
    for field in [684.9, 685.0, 685.016, 685.1, 686.0] {
        let h = build_hamiltonian(field, &two).unwrap();
        let (a, c, b) = (h[(0, 0)], h[(1, 1)], h[(0, 1)]);
        let mean = 0.5 * (a + c);
        let split = (0.25 * (a - c).powi(2) + b * b).sqrt();
        let mut numeric: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        numeric.sort_by(|x, y| x.partial_cmp(y).unwrap());
        worst = worst
            .max((numeric[0] - (mean - split)).abs())
            .max((numeric[1] - (mean + split)).abs());
    }
    let pass = zero == 0.0 && ratio_err < 1e-12 && worst < 1e-10;
    outcome(
        pass,
        format!("a(B0 + Delta) = {zero:e}, coupling ratio error {ratio_err:.1e}, two-level error {worst:.1e}"),
    )
}

fn determinism() -> Outcome {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut names: Vec<PathBuf> = fs::read_dir(&configs)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    names.sort();
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for path in &names {
        let config = load_config(path, None).unwrap();
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for d in &dirs {
            run(&config, d.path(), &RunOptions::default()).unwrap();
        }
        let mut files: Vec<_> = fs::read_dir(dirs[0].path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        files.sort();
        for f in files {
            compared += 1;
            let a = fs::read(dirs[0].path().join(&f)).unwrap();
            let b = fs::read(dirs[1].path().join(&f)).unwrap();
            if a != b {
                mismatches.push(format!(
                    "{}:{}",
                    path.file_name().unwrap().to_string_lossy(),
                    f.to_string_lossy()
                ));
            }
        }
    }
    outcome(
        mismatches.is_empty() && compared > 0,
        format!(
            "{} configs, {compared} files compared, mismatches {mismatches:?}",
            names.len()
        ),
    )
}

fn main() {
    let start = Instant::now();
    let report = transport_at(500.0, DEFAULT_TIME_STEP, None);
    let baseline = Baseline {
        report,
        seconds: start.elapsed().as_secs_f64(),
    };
    let criteria: Vec<(&str, Check)> = vec![
        (
            "transport fidelity",
            Box::new(|| transport_fidelity(&baseline)),
        ),
        (
            "adiabatic ordering",
            Box::new(|| adiabatic_ordering(&baseline)),
        ),
        ("noise robustness", Box::new(|| noise_robustness(&baseline))),
        ("model self-check", Box::new(|| model_self_check(&baseline))),
        (
            "numerical integrity",
            Box::new(|| numerical_integrity(&baseline)),
        ),
        ("spectral oracle", Box::new(spectral_oracle)),
        ("gate optimization", Box::new(gate_optimization)),
        ("gradient check", Box::new(gradient_check)),
        ("closed forms", Box::new(closed_forms)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
