use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hpl_cli::checks::Ctx;
use hpl_cli::error::CliError;
use hpl_cli::{run, verify, ExperimentConfig, DEFAULT_SEED};

const EXIT_CONFIG: u8 = 1;
const EXIT_FAILED: u8 = 2;

#[derive(Parser)]
#[command(name = "hpl", version, about = "Seeded experiments and acceptance checks for Poisson intensity estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run every acceptance criterion and print one PASS/FAIL line each.
    VerifyAll {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Master seed; falls back to the config, then HPL_SEED, then a fixed default.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Replication count for every Monte Carlo check.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    reps: Option<u64>,
    /// Worker threads for replications.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("HPL_SEED") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CliError::Usage(format!("HPL_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn set_jobs(jobs: Option<u64>) {
    if let Some(j) = jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j as usize).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
}

fn main_inner(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run { config, common } => {
            set_jobs(common.jobs);
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            if let Some(r) = common.reps {
                cfg.reps = r as usize;
            }
            if let Some(o) = common.out {
                cfg.out = o;
            }
            let seed = match common.seed.or(cfg.seed) {
                Some(s) => s,
                None => env_seed()?.unwrap_or(DEFAULT_SEED),
            };
            cfg.seed = Some(seed);
            let report = run::run(&cfg, seed)?;
            for r in &report.results {
                println!("{}", r.line());
            }
            println!("outputs in {}", cfg.out.display());
            Ok(report.all_pass())
        }
        Command::VerifyAll { common } => {
            set_jobs(common.jobs);
            let seed = match common.seed {
                Some(s) => s,
                None => env_seed()?.unwrap_or(DEFAULT_SEED),
            };
            let ctx = Ctx { seed, reps: common.reps.map(|r| r as usize) };
            let report = verify::verify_all(&ctx, |r| println!("{}", r.line()));
            let out = common.out.unwrap_or_else(|| PathBuf::from("out").join("verify-all"));
            report.write(&out, seed)?;
            println!("summary in {}", out.join("summary.csv").display());
            Ok(report.all_pass())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
