//! Experiment dispatch: runs a validated configuration, writes its output
//! files and a `summary.json` record.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use holotrap::feshbach::{
    entangling_power, evolve_gate_sampled, gate_unitary, RampSegment, ResonanceModel,
    ResonanceState,
};
use holotrap::optctrl::{optimize_with, ControlProblem};
use holotrap::propagator::{run_transport, TransportOptions, TransportReport};
use holotrap::spectral::instantaneous_spectrum;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, Experiment, NamedNoise, Plan, RunConfig, TrapSetup};
use crate::output::{fmt_f64, fmt_prob, render_ramp, Table};

pub const SUMMARY_FILE: &str = "summary.json";

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const NOT_CONVERGED: i32 = 4;
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(holotrap::Error),
    Output(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            // An unwritable output directory is a setup problem, not a
            // numerical one.
            RunError::Config(_) | RunError::Output(_) => exit::CONFIG,
            RunError::Numerical(_) => exit::NUMERICAL,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical(e) => write!(f, "numerical failure: {e}"),
            RunError::Output(m) => write!(f, "cannot write output: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<holotrap::Error> for RunError {
    fn from(e: holotrap::Error) -> Self {
        RunError::Numerical(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Record of a finished run. Everything except the wall-clock time is
/// written to `summary.json`, which therefore stays byte-identical between
/// reruns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub experiment: Experiment,
    pub input_hash: String,
    pub converged: bool,
    pub metrics: BTreeMap<String, f64>,
    pub parameters: serde_json::Value,
    pub outputs: Vec<OutputFile>,
    #[serde(skip)]
    pub wall_clock_s: f64,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            exit::OK
        } else {
            exit::NOT_CONVERGED
        }
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }
}

/// Options that do not change the results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub verbose: bool,
}

/// SHA-256 of the resolved configuration.
pub fn input_hash(config: &RunConfig) -> String {
    let json = serde_json::to_string(&config.plan).expect("plan serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Runs `config`, writing every output into `out_dir`.
pub fn run(
    config: &RunConfig,
    out_dir: &Path,
    options: &RunOptions,
) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let log = |msg: &str| {
        if options.verbose {
            eprintln!("[{}] {msg}", config.experiment());
        }
    };
    let mut metrics = Metrics::default();
    let mut files: Vec<(String, String)> = Vec::new();
    let mut converged = true;
    match &config.plan {
        Plan::Spectrum {
            trap,
            levels,
            samples,
        } => {
            log(&format!("{} samples of {levels} levels", samples + 1));
            let (spectrum, schedule) = run_spectrum(trap, *levels, *samples, &mut metrics)?;
            files.push(("spectrum.csv".into(), spectrum));
            files.push(("schedule.csv".into(), schedule));
        }
        Plan::Transport {
            trap,
            options,
            noise,
        } => {
            log(&format!(
                "{} steps on {} points",
                trap.time_grid().n_steps(),
                trap.points
            ));
            let report = transport(trap, options, noise.as_ref())?;
            transport_metrics(&report, "", &mut metrics);
            files.push(("trajectory.csv".into(), trajectory_csv(&report)));
        }
        Plan::NoiseSweep {
            trap,
            options,
            cases,
        } => {
            log(&format!("{} cases", cases.len()));
            let reports: Vec<Result<TransportReport, holotrap::Error>> = cases
                .par_iter()
                .map(|c| {
                    let r = transport(trap, options, Some(c));
                    log(&format!("case `{}` done", c.name));
                    r
                })
                .collect();
            let reports = reports.into_iter().collect::<Result<Vec<_>, _>>()?;
            files.push(("noise_sweep.csv".into(), sweep_csv(cases, &reports)));
            for (c, r) in cases.iter().zip(&reports) {
                transport_metrics(r, &format!("{}.", c.name), &mut metrics);
            }
        }
        Plan::Gate {
            model,
            ramp,
            samples_per_segment,
        } => {
            log(&format!(
                "{} segments, {} levels",
                ramp.len(),
                model.n_levels
            ));
            files.push((
                "gate.csv".into(),
                gate(model, ramp, *samples_per_segment, &mut metrics)?,
            ));
        }
        Plan::GateOptimize { problem } => {
            let (ramp, trace, gate_csv, ok) = gate_optimize(problem, &mut metrics, &log)?;
            converged = ok;
            files.push(("ramp.csv".into(), ramp));
            files.push(("trace.csv".into(), trace));
            files.push(("gate.csv".into(), gate_csv));
        }
    }

    fs::create_dir_all(out_dir)
        .map_err(|e| RunError::Output(format!("{}: {e}", out_dir.display())))?;
    let mut outputs = Vec::with_capacity(files.len());
    for (name, content) in &files {
        write_file(&out_dir.join(name), content)?;
        outputs.push(OutputFile {
            name: name.clone(),
            bytes: content.len(),
            sha256: hex::encode(Sha256::digest(content.as_bytes())),
        });
    }
    let summary = RunSummary {
        experiment: config.experiment(),
        input_hash: input_hash(config),
        converged,
        metrics: metrics.0,
        parameters: serde_json::to_value(&config.plan).expect("plan serializes"),
        outputs,
        wall_clock_s: 0.0,
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    write_file(&out_dir.join(SUMMARY_FILE), &json)?;
    Ok(RunSummary {
        wall_clock_s: start.elapsed().as_secs_f64(),
        ..summary
    })
}

fn write_file(path: &PathBuf, content: &str) -> Result<(), RunError> {
    fs::write(path, content).map_err(|e| RunError::Output(format!("{}: {e}", path.display())))
}

/// Headline numbers, stored at output precision.
#[derive(Default)]
struct Metrics(BTreeMap<String, f64>);

impl Metrics {
    fn set(&mut self, key: impl Into<String>, value: f64) {
        let rounded = fmt_f64(value).parse().expect("formatted float parses");
        self.0.insert(key.into(), rounded);
    }
}

fn run_spectrum(
    trap: &TrapSetup,
    levels: usize,
    samples: usize,
    metrics: &mut Metrics,
) -> Result<(String, String), RunError> {
    let schedule = trap.schedule();
    let grid = trap.grid();
    let times: Vec<f64> = (0..=samples)
        .map(|j| trap.duration * j as f64 / samples as f64)
        .collect();
    let spectra = times
        .par_iter()
        .map(|&t| {
            let p = schedule.sample(t)?;
            instantaneous_spectrum(&p, &grid, levels, t).map(|s| (p, s))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut header = vec!["t[hbar/eps]".to_string()];
    header.extend((0..levels).map(|n| format!("E{n}[eps]")));
    let mut energies = Table::new(header);
    let mut params = Table::new(["t[hbar/eps]", "A[eps]", "B[eps]", "d[a]"]);
    let mut min_gap = f64::INFINITY;
    let mut min_moving_gap = f64::INFINITY;
    for (t, (p, s)) in times.iter().zip(&spectra) {
        let mut row = vec![fmt_f64(*t)];
        row.extend(s.energies.iter().map(|&e| fmt_f64(e)));
        energies.push(row);
        params.push(vec![
            fmt_f64(*t),
            fmt_f64(p.depth_right),
            fmt_f64(p.depth_left),
            fmt_f64(p.separation),
        ]);
        min_gap = min_gap.min(s.min_gap());
        if levels > 3 {
            let e = &s.energies;
            min_moving_gap = min_moving_gap.min((e[2] - e[1]).min(e[3] - e[2]));
        }
    }
    metrics.set("min_gap", min_gap);
    if levels > 3 {
        metrics.set("min_moving_gap", min_moving_gap);
    }
    let first = &spectra[0].1.energies;
    let last = &spectra[spectra.len() - 1].1.energies;
    for n in 0..levels.min(4) {
        metrics.set(format!("E{n}_initial"), first[n]);
        metrics.set(format!("E{n}_final"), last[n]);
    }
    Ok((energies.render(), params.render()))
}

fn transport(
    trap: &TrapSetup,
    options: &TransportOptions,
    noise: Option<&NamedNoise>,
) -> Result<TransportReport, holotrap::Error> {
    run_transport(
        &trap.schedule(),
        &trap.grid(),
        &trap.time_grid(),
        noise.map(|n| n.noise),
        options,
    )
}

fn transport_metrics(r: &TransportReport, prefix: &str, metrics: &mut Metrics) {
    metrics.set(format!("{prefix}F_M"), r.fidelity_moving);
    metrics.set(format!("{prefix}F_R"), r.fidelity_register);
    metrics.set(format!("{prefix}min_F_M"), r.min_fidelity_moving);
    metrics.set(format!("{prefix}min_F_R"), r.min_fidelity_register);
    metrics.set(
        format!("{prefix}max_high_state_occupation"),
        r.max_high_state_occupation,
    );
    metrics.set(format!("{prefix}max_incompleteness"), r.max_incompleteness);
    metrics.set(format!("{prefix}max_norm_drift"), r.max_norm_drift);
    metrics.set(format!("{prefix}min_moving_gap"), r.min_moving_gap);
    metrics.set(
        format!("{prefix}min_tracking_overlap"),
        r.min_tracking_overlap,
    );
}

fn trajectory_csv(r: &TransportReport) -> String {
    let levels = r.moving.first().map_or(0, Vec::len);
    let mut header = vec!["t[hbar/eps]".to_string()];
    header.extend((0..levels).map(|n| format!("P{n}_M[1]")));
    header.extend((0..levels).map(|n| format!("P{n}_R[1]")));
    header.extend((0..levels).map(|n| format!("E{n}[eps]")));
    let mut table = Table::new(header);
    for (i, t) in r.times.iter().enumerate() {
        let mut row = vec![fmt_f64(*t)];
        row.extend(r.moving[i].iter().map(|&p| fmt_prob(p)));
        row.extend(r.register[i].iter().map(|&p| fmt_prob(p)));
        row.extend(r.energies[i].iter().map(|&e| fmt_f64(e)));
        table.push(row);
    }
    table.render()
}

fn sweep_csv(cases: &[NamedNoise], reports: &[TransportReport]) -> String {
    let mut table = Table::new([
        "case",
        "delta_d[a]",
        "delta_A[eps]",
        "delta_B[eps]",
        "omega[eps/hbar]",
        "F_M[1]",
        "F_R[1]",
        "min_F_M[1]",
        "min_F_R[1]",
        "max_high_state_occupation[1]",
        "max_norm_drift[1]",
    ]);
    for (c, r) in cases.iter().zip(reports) {
        table.push(vec![
            c.name.clone(),
            fmt_f64(c.noise.delta_d),
            fmt_f64(c.noise.delta_a),
            fmt_f64(c.noise.delta_b),
            fmt_f64(c.noise.omega),
            fmt_prob(r.fidelity_moving),
            fmt_prob(r.fidelity_register),
            fmt_prob(r.min_fidelity_moving),
            fmt_prob(r.min_fidelity_register),
            fmt_prob(r.max_high_state_occupation),
            fmt_f64(r.max_norm_drift),
        ]);
    }
    table.render()
}

fn gate(
    model: &ResonanceModel,
    ramp: &[RampSegment],
    per_segment: usize,
    metrics: &mut Metrics,
) -> Result<String, RunError> {
    let evolution = evolve_gate_sampled(ramp, model, &ResonanceState::ground(model), per_segment)?;
    let mut table = Table::new(["t[s]", "ground_return[1]", "phi[rad]"]);
    for s in &evolution.samples {
        table.push(vec![
            fmt_f64(s.t),
            fmt_prob(s.ground_return),
            fmt_f64(s.phi),
        ]);
    }
    let r = evolution.result;
    metrics.set("phi", r.phi);
    metrics.set("infidelity", r.infidelity);
    metrics.set("ground_return", r.ground_return);
    metrics.set("cz_phase_error", (r.phi - std::f64::consts::PI).abs());
    metrics.set("entangling_power", entangling_power(&gate_unitary(r.phi)));
    metrics.set("total_time_s", ramp.iter().map(|s| s.duration).sum());
    Ok(table.render())
}

fn gate_optimize(
    problem: &ControlProblem,
    metrics: &mut Metrics,
    log: &dyn Fn(&str),
) -> Result<(String, String, String, bool), RunError> {
    let trace = optimize_with(problem, |r| {
        log(&format!(
            "iteration {}: J = {:.3e}, infidelity = {:.3e}, phase error = {:.3e}",
            r.iteration, r.cost, r.infidelity, r.phase_error
        ))
    })?;
    let mut table = Table::new(["iteration[1]", "J[1]", "infidelity[1]", "phase_error[rad]"]);
    for r in &trace.iterations {
        table.push(vec![
            r.iteration.to_string(),
            fmt_f64(r.cost),
            fmt_prob(r.infidelity),
            fmt_f64(r.phase_error),
        ]);
    }
    let best = trace.best();
    let ramp = problem.segments(&trace.best_ramp);
    let gate_csv = gate(&problem.model, &ramp, 8, metrics)?;
    metrics.set("J", best.cost);
    metrics.set("optimizer_infidelity", best.infidelity);
    metrics.set("phase_error", best.phase_error);
    metrics.set("iterations", best.iteration as f64);
    Ok((
        render_ramp(&ramp),
        table.render(),
        gate_csv,
        trace.converged,
    ))
}
