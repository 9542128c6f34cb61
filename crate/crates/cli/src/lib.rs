//! Front end for `dcf`: configuration, sweeps and table output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};

use config::{Command, Flags, RunConfig};
use error::{CliError, CliResult};

/// Caps rayon's pool at `DCF_THREADS` when set.
pub fn init_threads(var: Option<String>) -> CliResult<()> {
    let Some(v) = var else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Config(format!("DCF_THREADS = `{v}`: expected a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Resolves the configuration, runs the command and writes its table.
pub fn execute(command: Command, flags: &Flags) -> CliResult<()> {
    let cfg = RunConfig::from_flags(command, flags)?;
    let (table, failure) = commands::run(&cfg);
    let table = table?;
    match &cfg.out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            table.write(&mut w, cfg.format)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write(&mut w, cfg.format)?;
            w.flush()?;
        }
    }
    for (k, v) in &table.meta {
        if k.starts_with("warning.") {
            eprintln!("warning: {v}");
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
