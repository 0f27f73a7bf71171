mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vne_core::scenario::ScenarioConfig;

/// Online virtual network embedding simulator.
///
/// Configuration is a flat `key = value` file (see `configs/default.cfg`);
/// `--set` flags override file values, and the VNE_SIM_SEED environment
/// variable (`7`, `1..5` or `1,4,9`) overrides the seed list.
#[derive(Parser, Debug)]
#[command(name = "vne-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// Config file; omitted keys take their defaults.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set n_nodes=50`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output directory; existing run files are overwritten.
    #[arg(long, short, default_value = "vne-out")]
    out: PathBuf,
    /// Parallel runs (default: available cores).
    #[arg(long, short)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every embedder on every seed.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run over a grid of parameter values, e.g. `--param x_candidates=2..10`.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// `key=a..b` (inclusive integer range) or `key=v1,v2,...`. Repeat for a grid.
        #[arg(long, required = true, value_name = "KEY=VALUES")]
        param: Vec<String>,
    },
    /// Write the substrate and workload for one seed without simulating.
    Gen {
        #[command(flatten)]
        config: ConfigArgs,
        /// Seed to generate (default: first configured seed).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short, default_value = "vne-out/gen")]
        out: PathBuf,
    },
    /// Re-run a saved run directory and check it reproduces byte for byte.
    Audit { run_dir: PathBuf },
}

fn load_config(args: &ConfigArgs) -> Result<ScenarioConfig, runner::CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| runner::CliError::Io(format!("{}: {e}", path.display())))?;
            ScenarioConfig::parse(&text).map_err(|e| runner::CliError::Config(e.to_string()))?
        }
        None => ScenarioConfig::default(),
    };
    let mut problems = Vec::new();
    for s in &args.sets {
        match s.split_once('=') {
            Some((k, v)) => {
                if let Err(e) = cfg.set(k, v) {
                    problems.push(format!("--set {s}: {e}"));
                }
            }
            None => problems.push(format!("--set {s}: expected KEY=VALUE")),
        }
    }
    if let Err(e) = cfg.validate() {
        problems.extend(e.problems);
    }
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(runner::CliError::Config(
            vne_core::ConfigError { problems }.to_string(),
        ))
    }
}

fn dispatch(cli: Cli) -> Result<(), runner::CliError> {
    match cli.command {
        Command::Run { config, output } => {
            let cfg = load_config(&config)?;
            let seeds = runner::resolve_seeds(&cfg)?;
            runner::run_points(&cfg, &seeds, &[Vec::new()], &output.out, output.jobs)
        }
        Command::Sweep {
            config,
            output,
            param,
        } => {
            let cfg = load_config(&config)?;
            let seeds = runner::resolve_seeds(&cfg)?;
            let points = runner::sweep_points(&cfg, &param)?;
            runner::run_points(&cfg, &seeds, &points, &output.out, output.jobs)
        }
        Command::Gen { config, seed, out } => {
            let cfg = load_config(&config)?;
            let seed = match seed {
                Some(s) => s,
                None => runner::resolve_seeds(&cfg)?[0],
            };
            runner::generate(&cfg, seed, &out)
        }
        Command::Audit { run_dir } => runner::audit_run(&run_dir),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
