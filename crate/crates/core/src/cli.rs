//! Command-line front end.
//!
//! ```text
//! ftnsim ber       --config fig2.json [--out fig2.csv] [--seed 7] [--set gamma=0.8]
//! ftnsim rmse      --config fig3.json
//! ftnsim weights   --config cfg.json
//! ftnsim channel   --gamma 0.8 [--seed 7]
//! ftnsim selfcheck
//! ```
//!
//! Exit codes: 0 on success, 1 for configuration or I/O errors, 2 for
//! numerical failures.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::harness::{self, ExperimentConfig};
use crate::{oracle, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ftnsim", version, about = "Faster-than-Nyquist link simulator with overlap FDE")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// BER vs Eb/N0 sweep.
    Ber(RunArgs),
    /// Per-position RMSE of the untrimmed FDE output.
    Rmse(RunArgs),
    /// Per-bin channel spectrum, noise PSD and FDE weights.
    Weights(RunArgs),
    /// Draw a Rayleigh tap-delay line as JSON.
    Channel(ChannelArgs),
    /// Small-N oracle suite.
    Selfcheck,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `rng_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// `key=value` override applied after the file is read; the value is
    /// parsed as JSON, falling back to a plain string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// FTN factor; the 16-symbol delay spread scales with it.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Reads a config file and applies `--set` and `--seed` overrides.
pub fn load_config(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut value: Value = serde_json::from_str(&text)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::invalid("config", "top level must be a JSON object"))?;
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| Error::invalid("--set", format!("{o:?} is not key=value")))?;
        let v = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        obj.insert(key.trim().to_string(), v);
    }
    if let Some(s) = seed {
        obj.insert("rng_seed".into(), Value::from(s));
    }
    let cfg: ExperimentConfig = serde_json::from_value(value)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Short hash identifying an effective configuration.
pub fn run_stamp(echo: &str) -> String {
    let digest = Sha256::digest(echo.as_bytes());
    digest.iter().take(4).map(|b| format!("{b:02x}")).collect::<String>()[..7].to_string()
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

fn prepare(args: &RunArgs) -> Result<ExperimentConfig> {
    let cfg = load_config(&args.config, &args.overrides, args.seed)?;
    let echo = serde_json::to_string(&cfg)?;
    eprintln!("config: {echo}");
    eprintln!("run: {}", run_stamp(&echo));
    Ok(cfg)
}

fn ber(args: &RunArgs) -> Result<i32> {
    let cfg = prepare(args)?;
    eprintln!("{}", harness::stopping_rule(&cfg));
    let report = harness::run_ber(&cfg)?;
    let mut out = open_out(&args.out)?;
    harness::write_ber_csv(&mut out, &report.rows)?;
    out.flush()?;
    let mut code = EXIT_OK;
    for f in &report.failures {
        eprintln!("point gamma={} ebn0_db={} failed: {}", f.gamma, f.ebn0_db, f.error);
        code = code.max(exit_code(&f.error));
    }
    Ok(code)
}

fn rmse(args: &RunArgs) -> Result<i32> {
    let cfg = prepare(args)?;
    let curves = harness::run_rmse(&cfg)?;
    let mut out = open_out(&args.out)?;
    harness::write_rmse_csv(&mut out, &curves)?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn weights(args: &RunArgs) -> Result<i32> {
    let cfg = prepare(args)?;
    let rows = harness::dump_weights(&cfg)?;
    let mut out = open_out(&args.out)?;
    harness::write_weights_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn channel(args: &ChannelArgs) -> Result<i32> {
    crate::channel::check_gamma(args.gamma)?;
    let ch = harness::rayleigh_draw(args.gamma, args.seed)?;
    let mut out = open_out(&args.out)?;
    serde_json::to_writer_pretty(&mut out, &ch)?;
    writeln!(out)?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn selfcheck() -> Result<i32> {
    let checks = oracle::selfcheck()?;
    let mut code = EXIT_OK;
    for c in &checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} {} (error {:.3e}, tolerance {:.0e})", c.name, c.error, c.tolerance);
        if !c.passed() {
            code = EXIT_NUMERICAL;
        }
    }
    Ok(code)
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Ber(a) => ber(a),
        Command::Rmse(a) => rmse(a),
        Command::Weights(a) => weights(a),
        Command::Channel(a) => channel(a),
        Command::Selfcheck => selfcheck(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
