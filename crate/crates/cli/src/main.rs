//! `tinytasks` command-line driver.

mod args;
mod commands;
mod config;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Exit code 1 for usage errors, 2 for failures while running.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<tinytasks::Error> for CliError {
    fn from(e: tinytasks::Error) -> Self {
        match e {
            tinytasks::Error::Config { .. }
            | tinytasks::Error::InvalidDistribution(_)
            | tinytasks::Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl CliError {
    fn in_field(self, name: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("--{name}: {m}")),
            other => other,
        }
    }
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
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(&cli.out, a),
        Command::Bound(a) => commands::bound(&cli.out, a),
        Command::Stability(a) => commands::stability(&cli.out, a),
        Command::Sweep(a) => commands::sweep(&cli.out, a),
        Command::Compare(a) => commands::compare(&cli.out, a),
        Command::FitOverhead(a) => commands::fit_overhead(&cli.out, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
