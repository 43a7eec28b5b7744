//! Command-line front end: builds a [`RunConfig`], runs one command and
//! renders its report.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use sharpcheck::report::Report;
use sharpcheck::Error;

pub use config::{Command, OutputFormat, RunConfig};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NON_CONVERGENCE: i32 = 3;
}

/// Runs the configured command. Thread-pool setup is left to the caller.
pub fn run(cfg: &RunConfig) -> Result<Report, Error> {
    cfg.validate().map_err(Error::Domain)?;
    let mut report = Report::new(cfg.timing);
    let cmd = cfg.command.expect("validated");
    report.run(|| match cmd {
        Command::Constants => commands::constants(cfg),
        Command::VerifyExtremal => commands::verify_extremal(cfg),
        Command::Deficit => commands::deficit_cmd(cfg),
        Command::PdeCheck => commands::pde_check(cfg),
        Command::Pohozaev => commands::pohozaev(cfg),
        Command::Mass => commands::mass(cfg),
        Command::Asymptotics => commands::asymptotics(cfg),
        Command::Supersolution => commands::supersolution(cfg),
        Command::LimitStudy => commands::limit_study(cfg),
        Command::Fullspace => commands::fullspace(cfg),
    })?;
    Ok(report)
}

pub fn exit_code(result: &Result<Report, Error>) -> i32 {
    match result {
        Ok(r) if r.all_pass() => exit::PASS,
        Ok(_) => exit::CHECK_FAILED,
        Err(Error::NonConvergence { .. }) => exit::NON_CONVERGENCE,
        Err(_) => exit::USAGE,
    }
}

pub fn render(report: &Report, format: OutputFormat) -> Result<String, Error> {
    match format {
        OutputFormat::Json => report.to_json().map(|s| s + "\n"),
        OutputFormat::Csv => report.to_csv(),
    }
}

/// Runs `cfg` inside a pool of `threads` workers (the global pool if `None`).
pub fn run_with_threads(cfg: &RunConfig, threads: Option<usize>) -> Result<Report, Error> {
    match threads {
        None => run(cfg),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?
            .install(|| run(cfg)),
    }
}
