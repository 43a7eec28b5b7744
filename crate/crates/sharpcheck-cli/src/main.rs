use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};

use sharpcheck_cli::{exit, exit_code, render, run_with_threads, Command, OutputFormat, RunConfig};

/// Numerical checks of the sharp half-space trace inequality, its extremals
/// and the associated Liouville system.
#[derive(Parser, Debug)]
#[command(name = "sharpcheck", version)]
struct Cli {
    /// Command to run; may instead come from the config file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// TOML file with RunConfig keys; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

#[derive(Args, Debug)]
struct Params {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Boundary centre x0', comma separated; padded with zeros.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    c_tilde: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Test field expression, e.g. "exp(-r^2)".
    #[arg(long, allow_hyphen_values = true)]
    field: Option<String>,
    /// Tail of --field: compact:R | bounded:k | log:c:k | linear | unknown.
    #[arg(long)]
    tail: Option<String>,
    /// gaussian | bump | zero | library
    #[arg(long)]
    builtin: Option<String>,
    /// Pohozaev centre y, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    y: Option<Vec<f64>>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    k_max: Option<u32>,
    /// Write the limit-study table here as CSV.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Report null wall times, for byte-identical output.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    threads: Option<usize>,
}

fn build_config(cli: Cli) -> Result<RunConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    let p = cli.params;
    if cli.command.is_some() {
        cfg.command = cli.command;
    }
    macro_rules! set {
        ($($src:ident => $dst:ident),* $(,)?) => {
            $(if let Some(v) = p.$src { cfg.$dst = v; })*
        };
    }
    set!(n => n, lambda => lambda, x0 => x0_prime, radii => radii, seed => seed, format => output_format,
         y => y, c0 => c0, k_max => k_max);
    macro_rules! set_opt {
        ($($src:ident => $dst:ident),* $(,)?) => {
            $(if p.$src.is_some() { cfg.$dst = p.$src; })*
        };
    }
    set_opt!(c_tilde => c_tilde, p => p, rel_tol => rel_tol, abs_tol => abs_tol, fixtures => fixtures_path,
             field => field, tail => tail, builtin => builtin, gamma => gamma, delta => delta, r1 => r1,
             table => table_path, threads => threads);
    if p.no_timing {
        cfg.timing = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit::USAGE as u8);
        }
    };
    let result = run_with_threads(&cfg, cfg.threads);
    let code = exit_code(&result);
    match &result {
        Ok(report) => {
            match render(report, cfg.output_format) {
                Ok(s) => print!("{s}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(exit::USAGE as u8);
                }
            }
            for row in report.failures() {
                eprintln!("{row}");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(code as u8)
}
