use std::process::ExitCode;

use clap::Parser;
use dcf_cli::config::{Command, Flags};

/// Dirac fermions in graphene under crossed fields: figure data and checks.
#[derive(Debug, Parser)]
#[command(name = "dcf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
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
    let result = dcf_cli::init_threads(std::env::var("DCF_THREADS").ok())
        .and_then(|_| dcf_cli::execute(cli.command, &cli.flags));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dcf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
