//! Run configuration: strict TOML parsing followed by validation into fully
//! resolved parameter sets. Every default that gets filled in is visible in
//! the resolved structs, which are echoed into the run summary.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use holotrap::feshbach::{RampSegment, ResonanceModel};
use holotrap::optctrl::{symmetric_ramp, ControlProblem};
use holotrap::potential::DoubleWellParams;
use holotrap::propagator::{TransportOptions, DEFAULT_GRID_POINTS, DEFAULT_TIME_STEP};
use holotrap::pulse::{default_transport_knots, Knot, NoiseSpec, PulseSchedule};
use holotrap::units::constants::{
    ATOMIC_MASS_UNIT, BOHR_MAGNETON_PER_GAUSS, BOHR_RADIUS, RB87_MASS_U,
};
use holotrap::units::{QuantityKind, SpatialGrid, TimeGrid, UnitSystem};
use serde::{Deserialize, Serialize};

use crate::output::read_ramp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    Transport,
    NoiseSweep,
    Gate,
    GateOptimize,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Transport => "transport",
            Experiment::NoiseSweep => "noise-sweep",
            Experiment::Gate => "gate",
            Experiment::GateOptimize => "gate-optimize",
        }
    }

    fn uses(self, block: &str) -> bool {
        let trap = ["units", "grid", "time", "schedule"];
        match self {
            Experiment::Spectrum => trap.contains(&block) || block == "spectrum",
            Experiment::Transport => {
                trap.contains(&block) || block == "transport" || block == "noise"
            }
            Experiment::NoiseSweep => {
                trap.contains(&block) || block == "transport" || block == "noise_sweep"
            }
            Experiment::Gate => block == "resonance" || block == "gate",
            Experiment::GateOptimize => block == "resonance" || block == "control",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "spectrum" => Ok(Experiment::Spectrum),
            "transport" => Ok(Experiment::Transport),
            "noise-sweep" => Ok(Experiment::NoiseSweep),
            "gate" => Ok(Experiment::Gate),
            "gate-optimize" => Ok(Experiment::GateOptimize),
            other => Err(format!(
                "unknown experiment `{other}`, expected spectrum, transport, noise-sweep, gate or gate-optimize"
            )),
        }
    }
}

/// A problem with one configuration field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io(String),
    Syntax(String),
    Invalid(Vec<FieldError>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "cannot read configuration: {m}"),
            ConfigError::Syntax(m) => write!(f, "configuration syntax error: {}", m.trim_end()),
            ConfigError::Invalid(errors) => {
                write!(f, "invalid configuration:")?;
                for e in errors {
                    write!(f, "\n  {}: {}", e.path, e.message)?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

// Raw documents, exactly as written by the user.

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<String>,
    output_dir: Option<PathBuf>,
    units: Option<RawUnits>,
    grid: Option<RawGrid>,
    time: Option<RawTime>,
    schedule: Option<RawSchedule>,
    transport: Option<RawTransport>,
    noise: Option<RawNoise>,
    noise_sweep: Option<RawSweep>,
    spectrum: Option<RawSpectrum>,
    resonance: Option<RawResonance>,
    gate: Option<RawGate>,
    control: Option<RawControl>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUnits {
    frequency_hz: Option<f64>,
    mass_u: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x_min: Option<f64>,
    x_max: Option<f64>,
    points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    duration: Option<f64>,
    dt: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    width: Option<f64>,
    knots: Option<Vec<RawKnot>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKnot {
    fraction: f64,
    depth_right: f64,
    depth_left: f64,
    separation: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransport {
    highest_level: Option<usize>,
    samples: Option<usize>,
    leakage_level: Option<usize>,
    tracking_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    name: Option<String>,
    delta_d: Option<f64>,
    delta_d_m: Option<f64>,
    delta_a: Option<f64>,
    delta_b: Option<f64>,
    omega: Option<f64>,
    period_s: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    cases: Vec<RawNoise>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    levels: Option<usize>,
    samples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResonance {
    b0_gauss: Option<f64>,
    width_gauss: Option<f64>,
    slope_j_per_gauss: Option<f64>,
    background_length_a0: Option<f64>,
    frequency_hz: Option<f64>,
    n_levels: Option<usize>,
    gamma: Option<f64>,
    mass_u: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    ramp_file: Option<PathBuf>,
    segments: Option<Vec<RawSegment>>,
    samples_per_segment: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    duration_s: f64,
    field_gauss: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    n_segments: Option<usize>,
    total_time_s: Option<f64>,
    b_min_gauss: Option<f64>,
    b_max_gauss: Option<f64>,
    ramp_edge_gauss: Option<f64>,
    ramp_low_gauss: Option<f64>,
    target_phase: Option<f64>,
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
}

// Resolved parameters.

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Units {
    pub frequency_hz: f64,
    pub mass_u: f64,
}

impl Units {
    pub fn system(&self) -> UnitSystem {
        UnitSystem::new(
            self.mass_u * ATOMIC_MASS_UNIT,
            std::f64::consts::TAU * self.frequency_hz,
        )
        .expect("validated")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnotEntry {
    pub fraction: f64,
    pub depth_right: f64,
    pub depth_left: f64,
    pub separation: f64,
}

/// Everything that defines a double-well run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapSetup {
    pub units: Units,
    pub width: f64,
    pub knots: Vec<KnotEntry>,
    pub duration: f64,
    pub dt: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl TrapSetup {
    pub fn schedule(&self) -> PulseSchedule {
        let knots: Vec<Knot> = self
            .knots
            .iter()
            .map(|k| Knot::new(k.fraction, k.depth_right, k.depth_left, k.separation))
            .collect();
        PulseSchedule::from_fractions(self.width, self.duration, &knots).expect("validated")
    }

    pub fn grid(&self) -> SpatialGrid {
        SpatialGrid::new(self.x_min, self.x_max, self.points).expect("validated")
    }

    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid::with_step(self.duration, self.dt).expect("validated")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedNoise {
    pub name: String,
    pub noise: NoiseSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Plan {
    Spectrum {
        trap: TrapSetup,
        levels: usize,
        samples: usize,
    },
    Transport {
        trap: TrapSetup,
        options: TransportOptions,
        noise: Option<NamedNoise>,
    },
    NoiseSweep {
        trap: TrapSetup,
        options: TransportOptions,
        cases: Vec<NamedNoise>,
    },
    Gate {
        model: ResonanceModel,
        ramp: Vec<RampSegment>,
        samples_per_segment: usize,
    },
    GateOptimize {
        problem: ControlProblem,
    },
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
    pub plan: Plan,
}

impl RunConfig {
    pub fn experiment(&self) -> Experiment {
        match self.plan {
            Plan::Spectrum { .. } => Experiment::Spectrum,
            Plan::Transport { .. } => Experiment::Transport,
            Plan::NoiseSweep { .. } => Experiment::NoiseSweep,
            Plan::Gate { .. } => Experiment::Gate,
            Plan::GateOptimize { .. } => Experiment::GateOptimize,
        }
    }
}

/// Reads and validates a configuration file. Relative paths inside it are
/// resolved against the file's directory.
pub fn load_config(path: &Path, experiment: Option<Experiment>) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, experiment, base)
}

/// Parses configuration text. `experiment` is the experiment requested on the
/// command line; when given, a differing `experiment` key is an error, when
/// absent the key is required.
pub fn parse_config(
    text: &str,
    experiment: Option<Experiment>,
    base: &Path,
) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut v = Validator::default();
    let declared = match raw.experiment.as_deref().map(Experiment::from_str) {
        Some(Ok(e)) => Some(e),
        Some(Err(m)) => {
            v.push("experiment", m);
            None
        }
        None => None,
    };
    let experiment = match (experiment, declared) {
        (Some(cli), Some(file)) if cli != file => {
            v.push(
                "experiment",
                format!("file says `{file}` but `{cli}` was requested"),
            );
            cli
        }
        (Some(e), _) | (None, Some(e)) => e,
        (None, None) => {
            v.push(
                "experiment",
                "missing; name the experiment in the file or on the command line",
            );
            return Err(v.finish().unwrap_err());
        }
    };
    let present = [
        ("units", raw.units.is_some()),
        ("grid", raw.grid.is_some()),
        ("time", raw.time.is_some()),
        ("schedule", raw.schedule.is_some()),
        ("transport", raw.transport.is_some()),
        ("noise", raw.noise.is_some()),
        ("noise_sweep", raw.noise_sweep.is_some()),
        ("spectrum", raw.spectrum.is_some()),
        ("resonance", raw.resonance.is_some()),
        ("gate", raw.gate.is_some()),
        ("control", raw.control.is_some()),
    ];
    for (block, is_present) in present {
        if is_present && !experiment.uses(block) {
            v.push(
                block,
                format!("block is not used by the `{experiment}` experiment"),
            );
        }
    }
    let plan = match experiment {
        Experiment::Spectrum => {
            let trap = v.trap(&raw);
            let s = raw.spectrum.unwrap_or_default();
            let levels = s.levels.unwrap_or(6);
            let samples = s.samples.unwrap_or(200);
            v.check(levels >= 1, "spectrum.levels", "must be at least 1");
            v.check(samples >= 1, "spectrum.samples", "must be at least 1");
            if let Some(t) = &trap {
                v.check(
                    levels < t.points / 2,
                    "spectrum.levels",
                    "must be below half the grid points",
                );
            }
            trap.map(|trap| Plan::Spectrum {
                trap,
                levels,
                samples,
            })
        }
        Experiment::Transport => {
            let trap = v.trap(&raw);
            let options = v.transport(raw.transport.unwrap_or_default(), trap.as_ref());
            let noise = match (&raw.noise, &trap) {
                (Some(n), Some(t)) => v.noise(n, &t.units, "noise"),
                _ => None,
            };
            trap.map(|trap| Plan::Transport {
                trap,
                options,
                noise,
            })
        }
        Experiment::NoiseSweep => {
            let trap = v.trap(&raw);
            let options = v.transport(raw.transport.unwrap_or_default(), trap.as_ref());
            let mut cases = Vec::new();
            match (&raw.noise_sweep, &trap) {
                (None, _) => v.push("noise_sweep", "missing block; list the cases to run"),
                (Some(s), _) if s.cases.is_empty() => {
                    v.push("noise_sweep.cases", "needs at least one case")
                }
                (Some(s), Some(t)) => {
                    for (i, c) in s.cases.iter().enumerate() {
                        let path = format!("noise_sweep.cases[{i}]");
                        if c.name.is_none() {
                            v.push(format!("{path}.name"), "every case needs a name");
                        }
                        if let Some(n) = v.noise(c, &t.units, &path) {
                            cases.push(n);
                        }
                    }
                }
                _ => {}
            }
            let mut names: Vec<&str> = cases.iter().map(|c| c.name.as_str()).collect();
            names.sort_unstable();
            if names.windows(2).any(|w| w[0] == w[1]) {
                v.push("noise_sweep.cases", "case names must be unique");
            }
            trap.map(|trap| Plan::NoiseSweep {
                trap,
                options,
                cases,
            })
        }
        Experiment::Gate => {
            let model = v.resonance(raw.resonance.unwrap_or_default());
            let gate = raw.gate.unwrap_or_default();
            let ramp = match (&gate.segments, &gate.ramp_file) {
                (Some(_), Some(_)) => {
                    v.push("gate", "give either `segments` or `ramp_file`, not both");
                    None
                }
                (Some(segs), None) => Some(
                    segs.iter()
                        .map(|s| RampSegment {
                            duration: s.duration_s,
                            field: s.field_gauss,
                        })
                        .collect::<Vec<_>>(),
                ),
                (None, Some(file)) => match read_ramp(&base.join(file)) {
                    Ok(r) => Some(r),
                    Err(e) => {
                        v.push("gate.ramp_file", e);
                        None
                    }
                },
                (None, None) => {
                    v.push("gate", "missing ramp; give `segments` or `ramp_file`");
                    None
                }
            };
            if let Some(r) = &ramp {
                if let Err(e) = holotrap::feshbach::validate_ramp(r) {
                    v.push("gate.segments", e.to_string());
                }
            }
            let samples_per_segment = gate.samples_per_segment.unwrap_or(8);
            v.check(
                samples_per_segment >= 1,
                "gate.samples_per_segment",
                "must be at least 1",
            );
            match (model, ramp) {
                (Some(model), Some(ramp)) => Some(Plan::Gate {
                    model,
                    ramp,
                    samples_per_segment,
                }),
                _ => None,
            }
        }
        Experiment::GateOptimize => {
            let model = v.resonance(raw.resonance.unwrap_or_default());
            model.and_then(|m| v.control(m, raw.control.unwrap_or_default()))
        }
    };
    v.finish()?;
    Ok(RunConfig {
        output_dir: raw.output_dir,
        plan: plan.expect("no errors implies a plan"),
    })
}

#[derive(Default)]
struct Validator {
    errors: Vec<FieldError>,
}

impl Validator {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(FieldError {
            path: path.into(),
            message: message.into(),
        });
    }

    fn check(&mut self, ok: bool, path: &str, message: &str) {
        if !ok {
            self.push(path, message);
        }
    }

    fn positive(&mut self, value: f64, path: &str) {
        if !(value > 0.0 && value.is_finite()) {
            self.push(path, format!("must be positive and finite, got {value}"));
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(self.errors))
        }
    }

    fn units(&mut self, raw: Option<&RawUnits>) -> Units {
        let frequency_hz = raw.and_then(|u| u.frequency_hz).unwrap_or(100.0e3);
        let mass_u = raw.and_then(|u| u.mass_u).unwrap_or(RB87_MASS_U);
        self.positive(frequency_hz, "units.frequency_hz");
        self.positive(mass_u, "units.mass_u");
        Units {
            frequency_hz,
            mass_u,
        }
    }

    fn trap(&mut self, raw: &RawConfig) -> Option<TrapSetup> {
        let before = self.errors.len();
        let units = self.units(raw.units.as_ref());
        let time = raw.time.as_ref();
        let duration = time.and_then(|t| t.duration).unwrap_or(500.0);
        let dt = time.and_then(|t| t.dt).unwrap_or(DEFAULT_TIME_STEP);
        self.positive(duration, "time.duration");
        self.positive(dt, "time.dt");
        if dt > duration {
            self.push("time.dt", "must not exceed the duration");
        }
        let schedule = raw.schedule.as_ref();
        let (default_width, default_knots) = default_transport_knots();
        let width = schedule.and_then(|s| s.width).unwrap_or(default_width);
        self.positive(width, "schedule.width");
        let knots: Vec<KnotEntry> = match schedule.and_then(|s| s.knots.as_ref()) {
            Some(ks) => ks
                .iter()
                .map(|k| KnotEntry {
                    fraction: k.fraction,
                    depth_right: k.depth_right,
                    depth_left: k.depth_left,
                    separation: k.separation,
                })
                .collect(),
            None => default_knots
                .iter()
                .map(|k| KnotEntry {
                    fraction: k.t,
                    depth_right: k.depth_right,
                    depth_left: k.depth_left,
                    separation: k.separation,
                })
                .collect(),
        };
        if knots.len() < 2 {
            self.push("schedule.knots", "need at least two knots");
        }
        for (i, k) in knots.iter().enumerate() {
            let path = format!("schedule.knots[{i}]");
            if let Err(e) = DoubleWellParams::new(
                width.max(f64::MIN_POSITIVE),
                k.depth_right,
                k.depth_left,
                k.separation,
            ) {
                self.push(path.clone(), e.to_string());
            }
            if !(0.0..=1.0).contains(&k.fraction) {
                self.push(format!("{path}.fraction"), "must lie in [0, 1]");
            }
        }
        if let Some(first) = knots.first() {
            if first.fraction != 0.0 {
                self.push(
                    "schedule.knots[0].fraction",
                    "first knot must be at fraction 0",
                );
            }
        }
        if let Some(last) = knots.last() {
            if knots.len() >= 2 && last.fraction != 1.0 {
                self.push(
                    format!("schedule.knots[{}].fraction", knots.len() - 1),
                    "last knot must be at fraction 1",
                );
            }
        }
        if knots.windows(2).any(|w| !(w[1].fraction > w[0].fraction)) {
            self.push("schedule.knots", "fractions must be strictly increasing");
        }
        let max_sep = knots.iter().map(|k| k.separation).fold(0.0, f64::max);
        let grid = raw.grid.as_ref();
        let x_min = grid.and_then(|g| g.x_min).unwrap_or(-max_sep - 24.0);
        let x_max = grid.and_then(|g| g.x_max).unwrap_or(24.0);
        let points = grid.and_then(|g| g.points).unwrap_or(DEFAULT_GRID_POINTS);
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            self.push(
                "grid",
                format!("need x_min < x_max, got [{x_min}, {x_max}]"),
            );
        }
        self.check(points >= 16, "grid.points", "need at least 16 points");
        if self.errors.len() > before {
            return None;
        }
        Some(TrapSetup {
            units,
            width,
            knots,
            duration,
            dt,
            x_min,
            x_max,
            points,
        })
    }

    fn transport(&mut self, raw: RawTransport, trap: Option<&TrapSetup>) -> TransportOptions {
        let d = TransportOptions::default();
        let o = TransportOptions {
            highest_level: raw.highest_level.unwrap_or(d.highest_level),
            n_out: raw.samples.unwrap_or(d.n_out),
            leakage_level: raw.leakage_level.unwrap_or(d.leakage_level),
            tracking_threshold: raw.tracking_threshold.unwrap_or(d.tracking_threshold),
        };
        self.check(
            o.highest_level >= 3,
            "transport.highest_level",
            "must be at least 3",
        );
        self.check(o.n_out >= 1, "transport.samples", "must be at least 1");
        self.check(
            o.leakage_level <= o.highest_level,
            "transport.leakage_level",
            "must not exceed highest_level",
        );
        self.check(
            (0.0..1.0).contains(&o.tracking_threshold),
            "transport.tracking_threshold",
            "must lie in [0, 1)",
        );
        if let Some(t) = trap {
            self.check(
                o.highest_level + 1 < t.points / 2,
                "transport.highest_level",
                "too many levels for the grid",
            );
        }
        o
    }

    fn noise(&mut self, raw: &RawNoise, units: &Units, path: &str) -> Option<NamedNoise> {
        let before = self.errors.len();
        let sys = units.system();
        let delta_d = match (raw.delta_d, raw.delta_d_m) {
            (Some(_), Some(_)) => {
                self.push(
                    format!("{path}.delta_d"),
                    "give either `delta_d` or `delta_d_m`, not both",
                );
                0.0
            }
            (Some(d), None) => d,
            (None, Some(m)) => sys.from_si(m, QuantityKind::Length),
            (None, None) => 0.0,
        };
        let delta_a = raw.delta_a.unwrap_or(0.0);
        let delta_b = raw.delta_b.unwrap_or(0.0);
        let omega = match (raw.omega, raw.period_s) {
            (Some(_), Some(_)) => {
                self.push(
                    format!("{path}.omega"),
                    "give either `omega` or `period_s`, not both",
                );
                0.0
            }
            (Some(w), None) => w,
            (None, Some(p)) => {
                self.positive(p, &format!("{path}.period_s"));
                std::f64::consts::TAU / sys.from_si(p, QuantityKind::Time)
            }
            (None, None) => {
                if delta_d != 0.0 || delta_a != 0.0 || delta_b != 0.0 {
                    self.push(
                        format!("{path}.omega"),
                        "missing; give `omega` or `period_s`",
                    );
                }
                0.0
            }
        };
        let spec = match NoiseSpec::new(delta_d, delta_a, delta_b, omega) {
            Ok(s) => Some(s),
            Err(e) => {
                self.push(path.to_string(), e.to_string());
                None
            }
        };
        if self.errors.len() > before {
            return None;
        }
        Some(NamedNoise {
            name: raw.name.clone().unwrap_or_else(|| "noise".into()),
            noise: spec?,
        })
    }

    fn resonance(&mut self, raw: RawResonance) -> Option<ResonanceModel> {
        let d = ResonanceModel::default();
        let m = ResonanceModel {
            b0: raw.b0_gauss.unwrap_or(d.b0),
            width: raw.width_gauss.unwrap_or(d.width),
            slope: raw.slope_j_per_gauss.unwrap_or(BOHR_MAGNETON_PER_GAUSS),
            background_length: raw.background_length_a0.unwrap_or(100.0) * BOHR_RADIUS,
            nu: std::f64::consts::TAU * raw.frequency_hz.unwrap_or(25.0e3),
            n_levels: raw.n_levels.unwrap_or(d.n_levels),
            gamma: raw.gamma.unwrap_or(d.gamma),
            mass: raw.mass_u.unwrap_or(RB87_MASS_U) * ATOMIC_MASS_UNIT,
        };
        match m.validate() {
            Ok(()) => Some(m),
            Err(e) => {
                self.push("resonance", e.to_string());
                None
            }
        }
    }

    fn control(&mut self, model: ResonanceModel, raw: RawControl) -> Option<Plan> {
        let d = ControlProblem::desk_scale(model).expect("defaults are valid");
        let n_segments = raw.n_segments.unwrap_or(d.n_segments);
        let total_time = raw.total_time_s.unwrap_or(d.total_time);
        let bounds = (
            raw.b_min_gauss.unwrap_or(d.bounds.0),
            raw.b_max_gauss.unwrap_or(d.bounds.1),
        );
        let edge = raw.ramp_edge_gauss.unwrap_or(model.b0 + 50.0 * model.width);
        let low = raw.ramp_low_gauss.unwrap_or(model.b0 - 2.0 * model.width);
        let before = self.errors.len();
        self.check(
            n_segments >= 2,
            "control.n_segments",
            "need at least two segments",
        );
        self.positive(total_time, "control.total_time_s");
        if !(bounds.0 < bounds.1) {
            self.push(
                "control.b_min_gauss",
                format!("must be below b_max_gauss ({} >= {})", bounds.0, bounds.1),
            );
        }
        for (value, path) in [
            (edge, "control.ramp_edge_gauss"),
            (low, "control.ramp_low_gauss"),
        ] {
            if !(value >= bounds.0 && value <= bounds.1) {
                self.push(path, format!("{value} G lies outside the bounds"));
            }
        }
        let tolerance = raw.tolerance.unwrap_or(d.tolerance);
        self.check(
            tolerance >= 0.0,
            "control.tolerance",
            "must be non-negative",
        );
        let target_phase = raw.target_phase.unwrap_or(d.target_phase);
        self.check(
            target_phase.is_finite(),
            "control.target_phase",
            "must be finite",
        );
        if self.errors.len() > before {
            return None;
        }
        let problem = ControlProblem {
            model,
            n_segments,
            total_time,
            bounds,
            target_phase,
            initial_ramp: symmetric_ramp(edge, low, n_segments),
            tolerance,
            max_iterations: raw.max_iterations.unwrap_or(d.max_iterations),
        };
        match problem.validate() {
            Ok(()) => Some(Plan::GateOptimize { problem }),
            Err(e) => {
                self.push("control", e.to_string());
                None
            }
        }
    }
}
