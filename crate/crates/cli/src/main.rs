use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anticyclo_cli::config::Task;
use anticyclo_cli::report::to_csv;
use anticyclo_cli::selftest::run_selftest;
use anticyclo_cli::{run_job, Cache, CliError, JobConfig, RunOptions};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "anticyclo", version, about = "Anticyclotomic theta and Bertolini-Darmon elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Job descriptor (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cache directory (overrides the config)
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Output file (overrides the config; stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for randomized suites
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exit with status 3 when a standing hypothesis fails
    #[arg(long, global = true)]
    require_hypotheses: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the standing hypotheses
    Hypotheses,
    /// List n-admissible primes
    Sieve,
    /// Brandt matrices, eigenvalue table, mass and Hecke checks
    Brandt,
    /// Theta and Bertolini-Darmon elements along the tower
    Theta,
    /// p-stabilized tower, e_p and stabilization multiples
    Stabilize,
    /// CRT gluing across primes
    Glue,
    /// Run every task listed in the config
    Run,
    /// Seeded randomized self checks
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(v).expect("serializable") + "\n",
        Format::Csv => to_csv(v),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Command::Selftest = cli.command {
        let rep = run_selftest(cli.seed)?;
        let ok = rep.suites.iter().all(|s| s.ok());
        emit(&render(&serde_json::to_value(&rep).expect("serializable"), cli.format), cli.out.as_ref())?;
        return if ok { Ok(()) } else { Err(CliError::Compute(anticyclo_core::Error::Invalid("selftest failures".into()))) };
    }
    let path = cli.config.as_ref().ok_or(CliError::Config("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = JobConfig::from_json(&text)?;
    let tasks = match cli.command {
        Command::Hypotheses => vec![Task::Hypotheses],
        Command::Sieve => vec![Task::Sieve],
        Command::Brandt => vec![Task::Brandt],
        Command::Theta => vec![Task::Theta],
        Command::Stabilize => vec![Task::Stabilize],
        Command::Glue => vec![Task::Glue],
        Command::Run | Command::Selftest => cfg.tasks.clone(),
    };
    let mut raw = cfg.raw.clone();
    raw.tasks = tasks;
    cfg = JobConfig::from_raw(raw)?;
    let cache_dir = cli.cache.clone().or(cfg.raw.cache_dir.as_ref().map(PathBuf::from));
    let out = cli.out.clone().or(cfg.raw.out.as_ref().map(PathBuf::from));
    let cache = Cache::new(cache_dir.as_deref())?;
    let opts = RunOptions { require_hypotheses: cli.require_hypotheses };
    match run_job(&cfg, &cache, &opts) {
        Ok(rep) => emit(&render(&rep.to_value(), cli.format), out.as_ref()),
        Err(CliError::Hypotheses(f, rep)) => {
            emit(&render(&rep.to_value(), cli.format), out.as_ref())?;
            Err(CliError::Hypotheses(f, rep))
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
