use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::{error, info};
use qfluct_cli::quantity::Quantity;
use qfluct_cli::{compute, validate_config, write_outputs, ConfigErrors, ConfigIssue, ExperimentConfig, ExperimentKind, RunError};

/// Energy-change statistics of open quantum systems.
///
/// Set QFLUCT_LOG (error, warn, info, debug, trace) to control log output.
#[derive(Parser)]
#[command(name = "qfluct", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write results.csv, effective_config.toml and manifest.json.
    Run {
        config: PathBuf,
        /// Overrides ensemble.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a configuration and print it with all defaults filled in.
    Validate { config: PathBuf },
    /// List experiment kinds and output quantities.
    ListExperiments,
}

fn load(path: &Path) -> Result<ExperimentConfig, RunError> {
    let raw = fs::read_to_string(path).map_err(|e| {
        RunError::Config(ConfigErrors(vec![ConfigIssue {
            path: String::new(),
            message: format!("cannot read {}: {e}", path.display()),
        }]))
    })?;
    validate_config(&raw).map_err(RunError::Config)
}

fn run(path: &Path, seed: Option<u64>, out: Option<PathBuf>, threads: Option<usize>) -> Result<(), RunError> {
    let mut config = load(path)?;
    if let Some(seed) = seed {
        if config.initial_states.is_some() {
            return Err(RunError::Config(ConfigErrors(vec![ConfigIssue {
                path: "initial_states".into(),
                message: "--seed has no effect with explicit initial states".into(),
            }])));
        }
        config.ensemble.get_or_insert_with(Default::default).seed = seed;
    }
    if let Some(out) = out {
        config.output_dir = Some(out);
    }
    let config = config.materialize();
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Config(ConfigErrors(vec![ConfigIssue {
                path: "--threads".into(),
                message: e.to_string(),
            }])))?;
    }
    let threads = rayon::current_num_threads();
    info!("running {} on {threads} threads", config.experiment);
    let start = Instant::now();
    let output = compute(&config)?;
    let dir = config.output_dir_or_default();
    let files = write_outputs(&dir, &config, &output, start.elapsed(), threads)?;
    println!(
        "{} rows for {} states x {} snapshots written to {}",
        output.rows.len(),
        output.n_states,
        output.times.len(),
        files.dir.display()
    );
    Ok(())
}

fn list_experiments() {
    println!("experiments:");
    for kind in ExperimentKind::ALL {
        println!("  {:<8} {}", kind.name(), kind.description());
        if let Some(q) = kind.fixed_quantities() {
            let names: Vec<&str> = q.iter().map(|q| q.name()).collect();
            println!("  {:<8}   quantities: {}", "", names.join(", "));
        }
    }
    println!("\nquantities (sweep and custom):");
    for q in Quantity::catalogue() {
        println!("  {:<30} {}", q.name(), q.description());
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QFLUCT_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            out,
            threads,
        } => run(&config, seed, out, threads),
        Command::Validate { config } => load(&config).map(|c| print!("{}", c.materialize().to_toml())),
        Command::ListExperiments => {
            list_experiments();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
