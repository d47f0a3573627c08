//! `qct` command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure, 2 configuration error,
//! 3 a key-establishment subprotocol ran out of retries.

pub mod demo;
pub mod selftest;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use qct_core::config::{parse_config, ConfigError};
use qct_core::netsim;
use qct_core::report::{self, Format, ReportDocument};
use qct_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RETRIES: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qct", version, about = "Controlled quantum teleportation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the trials described by a scenario file.
    Run(RunArgs),
    /// Walk through the two-agent example.
    Demo,
    /// Run the built-in consistency checks.
    Selftest,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `trials`.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include every trial in json and text reports. CSV always lists trials.
    #[arg(long)]
    pub per_trial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Json => Format::Json,
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Text => Format::Text,
        }
    }
}

/// Runs a parsed command line; diagnostics go to `stderr`.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Run(args) => run_scenario(&args, stdout, stderr),
        Command::Demo => match demo::run_demo() {
            Ok(t) => emit(stdout, stderr, &t.render()),
            Err(e) => fail(stderr, EXIT_INTERNAL, &e.to_string()),
        },
        Command::Selftest => {
            let checks = selftest::run_selftest();
            let mut text = String::new();
            for c in &checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                text.push_str(&format!("{status}  {:<22} {}\n", c.name, c.detail));
            }
            let code = emit(stdout, stderr, &text);
            if code == EXIT_OK && checks.iter().all(|c| c.passed) {
                EXIT_OK
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

fn emit(stdout: &mut dyn Write, stderr: &mut dyn Write, text: &str) -> i32 {
    match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(stderr, EXIT_INTERNAL, &format!("writing output: {e}")),
    }
}

fn fail(stderr: &mut dyn Write, code: i32, message: &str) -> i32 {
    let _ = writeln!(stderr, "qct: {message}");
    code
}

fn load(args: &RunArgs) -> Result<qct_core::netsim::ScenarioConfig, String> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| format!("{}: {e}", args.config.display()))?;
    let mut config = parse_config(&text).map_err(|e| format!("{}: {e}", args.config.display()))?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    config
        .validate()
        .map_err(|e: ConfigError| format!("after overrides: {e}"))?;
    Ok(config)
}

fn run_scenario(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let config = match load(args) {
        Ok(c) => c,
        Err(message) => return fail(stderr, EXIT_CONFIG, &message),
    };
    let result = match netsim::run_trials(&config) {
        Ok(r) => r,
        Err(e @ Error::RetriesExhausted { .. }) => return fail(stderr, EXIT_RETRIES, &e.to_string()),
        Err(e) => return fail(stderr, EXIT_INTERNAL, &e.to_string()),
    };
    let format = Format::from(args.format);
    let include_trials = args.per_trial || format == Format::Csv;
    let doc = ReportDocument::new(config, result, include_trials);
    let text = match report::render(&doc, format) {
        Ok(t) => t,
        Err(e) => return fail(stderr, EXIT_INTERNAL, &e.to_string()),
    };
    match &args.out {
        Some(path) => write_file(path, &text, stderr),
        None => emit(stdout, stderr, &text),
    }
}

fn write_file(path: &Path, text: &str, stderr: &mut dyn Write) -> i32 {
    match std::fs::write(path, text) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(stderr, EXIT_INTERNAL, &format!("{}: {e}", path.display())),
    }
}
