use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use holotrap_cli::{exit, load_config, run, Experiment, RunError, RunOptions};

#[derive(Parser)]
#[command(
    name = "holotrap",
    version,
    about = "Double-well transport and Feshbach gate simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Progress messages on stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Instantaneous spectrum and sampled pulse schedule.
    Spectrum,
    /// Transport of the moving and register atoms.
    Transport,
    /// Transport under each configured noise case.
    NoiseSweep,
    /// Phase accumulated along a field ramp.
    Gate,
    /// Optimize a field ramp towards a controlled-phase gate.
    GateOptimize,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Spectrum => Experiment::Spectrum,
            Command::Transport => Experiment::Transport,
            Command::NoiseSweep => Experiment::NoiseSweep,
            Command::Gate => Experiment::Gate,
            Command::GateOptimize => Experiment::GateOptimize,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(execute(&cli) as u8)
}

fn execute(cli: &Cli) -> i32 {
    let Some(path) = &cli.config else {
        eprintln!("error: --config <PATH> is required");
        return exit::CONFIG;
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return exit::CONFIG;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start thread pool: {e}");
            return exit::CONFIG;
        }
    }
    let experiment = Experiment::from(cli.command);
    let config = match load_config(path, Some(experiment)) {
        Ok(c) => c,
        Err(e) => return fail(&RunError::Config(e)),
    };
    let out = match (&cli.out, &config.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => path.parent().unwrap_or(std::path::Path::new(".")).join(o),
        (None, None) => PathBuf::from("output"),
    };
    let options = RunOptions {
        verbose: cli.verbose,
    };
    match run(&config, &out, &options) {
        Ok(summary) => {
            println!("experiment: {}", summary.experiment);
            println!("input hash: {}", summary.input_hash);
            for (k, v) in &summary.metrics {
                println!("{k}: {v:.11e}");
            }
            for f in &summary.outputs {
                println!("wrote {} ({} bytes)", out.join(&f.name).display(), f.bytes);
            }
            println!("wall clock: {:.3} s", summary.wall_clock_s);
            if !summary.converged {
                eprintln!("warning: optimizer stopped at the iteration cap without converging");
            }
            summary.exit_code()
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &RunError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}
