mod config;
mod experiment;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{parse_symbol, Experiment, ExperimentConfig, Format};

#[derive(Parser, Debug)]
#[command(name = "ldl", version, about = "Low-density-limit correlation experiments")]
struct Cli {
    /// Experiment file, sidecar, or bare model file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report path; a `<out>.meta.json` sidecar is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Exit with status 2 when the experiment's acceptance check fails.
    #[arg(long, global = true)]
    assert: bool,
    /// Seed for randomized configurations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Limiting truncated correlation of the configured symbols.
    Limit(SymbolArgs),
    /// Finite-epsilon truncated correlations against their limit.
    Sweep(SweepArgs),
    /// Limiting truncated function against the free white-noise moment.
    FreeCheck {
        #[command(flatten)]
        symbols: SymbolArgs,
        /// Random configurations used when no symbols are configured.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Limiting cumulants and moments of the Poisson element.
    Poisson {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 6)]
        orders: usize,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        omega_index: i64,
        #[arg(long, default_value_t = 64)]
        grid_bins: usize,
        /// Upper grid edge, 2 lambda by default.
        #[arg(long)]
        e_max: Option<f64>,
    },
    /// Centered correlation of time-separated groups.
    Independence {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        separation: f64,
    },
    /// Vacuum expectation of white-noise number operators.
    WnExpect {
        #[command(flatten)]
        symbols: SymbolArgs,
        #[arg(long)]
        order: Option<usize>,
        /// Print every rewrite round to stderr.
        #[arg(long)]
        show_steps: bool,
        /// Drop the scalar parts, keeping only connected contractions.
        #[arg(long)]
        connected_only: bool,
    },
    /// Pair diagrams of arity n with their classification.
    Diagrams {
        #[arg(long)]
        n: usize,
    },
    /// Bell numbers up to n.
    Bell {
        #[arg(long)]
        n: usize,
    },
    /// Delta-sequence integral for Gaussian pairs.
    DeltaLemma {
        #[arg(long, default_value_t = 1.0)]
        sigma_x: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma_t: f64,
        #[arg(long, value_delimiter = ',')]
        epsilons: Vec<f64>,
    },
    /// Runs the experiment stored in `--config`.
    Run,
}

#[derive(clap::Args, Debug)]
struct SymbolArgs {
    /// Comma-separated `f:g[:omega[:center:width]]`, replacing configured symbols.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    symbols: Vec<String>,
}

#[derive(clap::Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    symbols: SymbolArgs,
    #[arg(long, value_delimiter = ',')]
    epsilons: Vec<f64>,
}

impl SymbolArgs {
    fn apply(&self, config: &mut ExperimentConfig) -> Result<()> {
        if !self.symbols.is_empty() {
            config.symbols = self.symbols.iter().map(|s| parse_symbol(s)).collect::<Result<_>>()?;
        }
        Ok(())
    }
}

impl SweepArgs {
    fn apply(&self, config: &mut ExperimentConfig) -> Result<()> {
        self.symbols.apply(config)?;
        if !self.epsilons.is_empty() {
            config.epsilons = self.epsilons.clone();
        }
        Ok(())
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => config::load(path)?,
        None => ExperimentConfig::empty(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let experiment = match &cli.command {
        Command::Limit(s) => {
            s.apply(&mut config)?;
            Experiment::Limit
        }
        Command::Sweep(s) => {
            s.apply(&mut config)?;
            Experiment::Sweep
        }
        Command::FreeCheck { symbols, trials } => {
            symbols.apply(&mut config)?;
            Experiment::FreeCheck { trials: *trials }
        }
        Command::Poisson {
            lambda,
            orders,
            omega_index,
            grid_bins,
            e_max,
        } => Experiment::Poisson {
            lambda: *lambda,
            orders: *orders,
            omega_index: *omega_index,
            grid_bins: *grid_bins,
            e_max: *e_max,
        },
        Command::Independence { sweep, separation } => {
            sweep.apply(&mut config)?;
            Experiment::Independence { separation: *separation }
        }
        Command::WnExpect {
            symbols,
            order,
            show_steps,
            connected_only,
        } => {
            symbols.apply(&mut config)?;
            Experiment::WnExpect {
                order: *order,
                show_steps: *show_steps,
                connected_only: *connected_only,
            }
        }
        Command::Diagrams { n } => Experiment::Diagrams { n: *n },
        Command::Bell { n } => Experiment::Bell { n: *n },
        Command::DeltaLemma {
            sigma_x,
            sigma_t,
            epsilons,
        } => {
            if !epsilons.is_empty() {
                config.epsilons = epsilons.clone();
            }
            Experiment::DeltaLemma {
                sigma_x: *sigma_x,
                sigma_t: *sigma_t,
            }
        }
        Command::Run => config
            .experiment
            .clone()
            .context("`run` needs a config with an `experiment` entry")?,
    };
    config.experiment = Some(experiment);
    Ok(config)
}

fn execute(cli: &Cli) -> Result<bool> {
    let config = load_config(cli)?;
    let experiment = config.experiment.clone().expect("set by load_config");
    let report = experiment::run(&experiment, &config)?;
    let configured = config.output.as_ref();
    let format = cli
        .format
        .or_else(|| configured.and_then(|o| o.format))
        .unwrap_or(Format::Csv);
    let out = cli.out.clone().or_else(|| configured.and_then(|o| o.path.clone()));
    output::write(&report, format, out.as_deref(), &config)?;
    let Some(check) = &report.check else {
        return Ok(true);
    };
    eprintln!("check {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.summary);
    Ok(check.passed || !cli.assert)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
