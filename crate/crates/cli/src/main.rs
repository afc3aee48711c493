use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "balanced", version, about = "Balanced metrics on vector bundles over P1 and P2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate T from the configured initial metric and write trace/result files.
    Run { config: PathBuf },
    /// Check the invariant suite on the configured problem.
    Verify { config: PathBuf },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            std::process::exit(balanced_cli::ExitCode::InvalidInput.code());
        }
        Err(e) => {
            let _ = e.print();
            std::process::exit(0);
        }
    };
    let code = match cli.command {
        Command::Run { config } => balanced_cli::run_command(&config),
        Command::Verify { config } => balanced_cli::verify_command(&config),
    };
    std::process::exit(code.code());
}
