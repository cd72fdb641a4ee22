//! `anytime-ppm` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error (including invalid
//! parameter values), 3 numeric or capacity error.

mod args;
mod commands;
mod config;
mod parse;

use std::ffi::OsString;

use clap::Parser;

use anytime_ppm::Error;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Error::Domain(_) | Error::Parse(_) => 2,
                Error::Capacity { .. }
                | Error::Numeric(_)
                | Error::InsufficientData { .. }
                | Error::InfiniteDivergence { .. }
                | Error::EmptyPlan { .. } => 3,
                Error::Io(_) | Error::Csv(_) => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

/// Runs one invocation; `argv[0]` is the program name. Returns the exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let raw: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let (argv, config) = match config::expand(raw.clone()) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let cli = match args::Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let inv = commands::Invocation {
        argv: raw.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        config,
    };
    match commands::run(cli.command, &inv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
