use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lticlust_harness::config::ExperimentConfig;
use lticlust_harness::error::{HarnessError, Result};
use lticlust_harness::plot::emit_plots;
use lticlust_harness::report::{emit_csv, emit_summary, read_csv};
use lticlust_harness::scenario::generate_scenario;
use lticlust_harness::sweep::{run_sweep, scenario_seed};
use lticlust_harness::validation;

#[derive(Parser)]
#[command(name = "lticlust", version, about = "Clustered LTI system identification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory, overriding the config's `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Trials per grid cell, overriding the config.
    #[arg(long, global = true)]
    trials: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one scenario per width and write it as JSON.
    Generate,
    /// Run the sweep and write results.csv and summary.csv.
    Run,
    /// Render SVG figures from a results CSV.
    Plot {
        /// Results CSV (default: <out>/results.csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the acceptance checks.
    Validate {
        /// Run only these checks (1-10); repeatable.
        #[arg(long = "check")]
        checks: Vec<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    if cli.threads == Some(0) {
        return Err(HarnessError::Config("--threads must be at least 1".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.threads {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| dispatch(&cli))
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| HarnessError::Config("--config <path> is required".into()))?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(trials) = cli.trials {
        config.trials = trials;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("results"))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate => {
            let config = load_config(cli)?;
            ensure_dir(&config.out_dir)?;
            for (i, &width) in config.width_grid.iter().enumerate() {
                let scenario =
                    generate_scenario(&config, config.per_cluster, width, scenario_seed(&config, 0))?;
                let path = config.out_dir.join(format!("scenario_w{i}.json"));
                write(&path, &scenario.to_json())?;
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Run => {
            let config = load_config(cli)?;
            let rows = run_sweep(&config)?;
            ensure_dir(&config.out_dir)?;
            write(&config.out_dir.join("config.json"), &config.to_json())?;
            let results = config.out_dir.join("results.csv");
            emit_csv(&rows, &results)?;
            emit_summary(&rows, &config.out_dir.join("summary.csv"))?;
            let failed = rows.iter().filter(|r| r.failed()).count();
            println!("{} rows ({failed} failed trials) -> {}", rows.len(), results.display());
            Ok(())
        }
        Command::Plot { csv } => {
            let dir = out_dir(cli);
            let input = csv.clone().unwrap_or_else(|| dir.join("results.csv"));
            let rows = read_csv(&input)?;
            for path in emit_plots(&rows, &dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Validate { checks } => {
            let seed = match (&cli.config, cli.seed) {
                (_, Some(seed)) => seed,
                (Some(_), None) => load_config(cli)?.seed,
                (None, None) => ExperimentConfig::reference().seed,
            };
            let ids: Vec<usize> = if checks.is_empty() {
                (1..=validation::CHECK_COUNT).collect()
            } else {
                checks.clone()
            };
            let mut lines = Vec::new();
            let mut all_passed = true;
            for id in ids {
                let outcome = validation::run_check(id, seed)
                    .ok_or_else(|| HarnessError::Config(format!("no check numbered {id}")))?;
                println!("{outcome}");
                all_passed &= outcome.passed;
                lines.push(outcome.to_string());
            }
            if let Some(dir) = &cli.out {
                ensure_dir(dir)?;
                write(&dir.join("validation.txt"), &(lines.join("\n") + "\n"))?;
            }
            if all_passed {
                Ok(())
            } else {
                Err(HarnessError::ChecksFailed)
            }
        }
    }
}
