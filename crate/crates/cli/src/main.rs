use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use diophantine_cli::{execute_file, Command, RunOptions, VariantName};

#[derive(Parser)]
#[command(name = "diophantine", version, about = "Diophantine approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config and the environment.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Admissibility predicate for the flow index set.
    #[arg(long, global = true, value_enum)]
    variant: Option<VariantName>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Exponent curves and estimates.
    Exponent,
    /// Monte Carlo exponents along a Veronese curve.
    ExtremalMc,
    /// Flow reformulation against a brute-force oracle.
    Reformulate,
    /// Contracting, decaying and doubling certificates.
    Certify,
    /// 5r-covering and the essential split.
    Cover,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Exponent => Command::Exponent,
            Cmd::ExtremalMc => Command::ExtremalMc,
            Cmd::Reformulate => Command::Reformulate,
            Cmd::Certify => Command::Certify,
            Cmd::Cover => Command::Cover,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Some(config) = cli.config else {
        eprintln!("config error: --config <path> is required");
        return ExitCode::from(1);
    };
    let opts = RunOptions {
        out_dir: cli.out,
        workers: cli.workers,
        seed: cli.seed,
        variant: cli.variant,
    };
    match execute_file(cli.command.into(), &config, &opts) {
        Ok(outcome) if outcome.violations.is_empty() => {
            println!("{}", outcome.out_dir.display());
            ExitCode::SUCCESS
        }
        Ok(outcome) => {
            for v in &outcome.violations {
                eprintln!("violation: {v}");
            }
            eprintln!("property check failed; results in {}", outcome.out_dir.display());
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
