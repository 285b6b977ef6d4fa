//! Experiment runner: toy-model sweeps, bound presets over channel files,
//! PAC-Bayes evaluations and the randomized property suites.
//!
//! Reports echo their fully resolved configuration (flags take precedence
//! over the `CHAINBOUND_SEED` environment variable, which beats the
//! defaults), use '.' decimals with 17 significant digits, and are
//! byte-identical for a fixed configuration and seed.
//!
//! Exit codes: 0 success, 1 property-suite failures, 2 usage errors,
//! 3 I/O errors, 4 input parse/validation errors, 5 computation errors.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

mod pac_config;
mod report;
mod runs;

#[derive(Parser)]
#[command(name = "chainbound", version, about = "Chained generalisation bound experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Uniform/quadratic toy family: analytic vs engine vs Monte Carlo rows
    Toy1 {
        /// Single value "3" or inclusive sweep "1..6"
        #[arg(long, value_name = "K|A..B")]
        k_star: String,
        /// Channel discretization depth; defaults to k_star + 10
        #[arg(long)]
        resolution: Option<u32>,
        /// Monte Carlo sample count for the unchained estimate
        #[arg(long, default_value_t = 100_000)]
        mc_samples: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Gaussian-direction toy family: gap closed form vs quadrature,
    /// transport brackets and the Monte Carlo estimate
    Toy2 {
        /// Comma-separated offsets, e.g. "1,2,4,8"
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Evaluate a catalogue preset on a channel JSON file
    Bounds {
        #[arg(long)]
        channel: PathBuf,
        /// Preset name from the catalogue (see `--preset list`)
        #[arg(long)]
        preset: String,
        #[arg(long, default_value_t = 1.0)]
        xi: f64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Net spec for chained presets: dyadic:DIM:KMAX,
        /// nested-dyadic:DIM:KMAX, circle:KMAX or nested-circle:KMAX
        #[arg(long)]
        net: Option<String>,
        #[arg(long)]
        k_trunc: Option<usize>,
        /// Exponent for the power-divergence presets (default 2)
        #[arg(long)]
        power_p: Option<f64>,
        /// Supplied divergence cap for the chained tail certificate,
        /// overriding the derived unchained value
        #[arg(long)]
        tail_cap: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Evaluate standard/chained PAC-Bayes bounds from a JSON config
    Pac {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the randomized property suites
    Check {
        /// nets, divergences, monotonicity, pinsker, t1, regularity or all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// CLI failure with its exit code and machine-readable reason.
pub struct Failure {
    pub exit: u8,
    pub code: String,
    pub msg: String,
}

impl Failure {
    fn io(e: std::io::Error) -> Self {
        Failure { exit: 3, code: "IO".into(), msg: e.to_string() }
    }

    fn parse(msg: impl Into<String>) -> Self {
        Failure { exit: 4, code: "PARSE_ERROR".into(), msg: msg.into() }
    }

    fn from_lib(e: chainbound::Error) -> Self {
        let exit = match e.code() {
            // input validation problems
            "BAD_CONFIG" | "SUM_NOT_ONE" | "NEGATIVE_MASS" | "DUPLICATE_LABEL"
            | "DIMENSION_MISMATCH" | "BAD_EXPONENT" | "BAD_DELTA" | "BAD_LAMBDA"
            | "BAD_ALPHA" | "BAD_LEVEL" | "SCHEDULE_TOO_DEEP" | "NOT_NESTED"
            | "EMPTY_GRID" | "LABEL_MISMATCH" => 4,
            // computation / data problems on otherwise valid inputs
            _ => 5,
        };
        Failure { exit, code: e.code().into(), msg: e.to_string() }
    }
}

/// Resolve the RNG seed: flag beats `CHAINBOUND_SEED` beats 0.
fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| std::env::var("CHAINBOUND_SEED").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(0)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Failure::io),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Toy1 { k_star, resolution, mc_samples, seed, out, format } => {
            runs::run_toy1(&k_star, resolution, mc_samples, resolve_seed(seed), format)
                .and_then(|text| emit(out.as_ref(), &text))
        }
        Cmd::Toy2 { a, samples, seed, out, format } => {
            runs::run_toy2(&a, samples, resolve_seed(seed), format)
                .and_then(|text| emit(out.as_ref(), &text))
        }
        Cmd::Bounds { channel, preset, xi, m, net, k_trunc, power_p, tail_cap, out, format } => {
            runs::run_bounds(
                &channel,
                &preset,
                xi,
                m,
                net.as_deref(),
                k_trunc,
                power_p,
                tail_cap,
                format,
            )
            .and_then(|text| emit(out.as_ref(), &text))
        }
        Cmd::Pac { config, out, format } => {
            runs::run_pac(&config, format).and_then(|text| emit(out.as_ref(), &text))
        }
        Cmd::Check { suite, seed, out } => {
            match runs::run_check(&suite, resolve_seed(seed)) {
                Err(f) => Err(f),
                Ok((text, all_passed)) => match emit(out.as_ref(), &text) {
                    Err(f) => Err(f),
                    Ok(()) if all_passed => Ok(()),
                    Ok(()) => return ExitCode::from(1),
                },
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: code={} msg={:?}", f.code, f.msg);
            ExitCode::from(f.exit)
        }
    }
}
