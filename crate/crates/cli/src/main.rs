//! `genie-mac`: achievable rates, sum-capacity certificates, and genie-MAC
//! outer bounds for K-user Gaussian interference channels.
//!
//! All rates are reported in bits per real channel use (base-2 logarithms).
//! Exit codes: 0 success (and feasible, for `verify`), 1 usage error,
//! 2 domain error (non-degraded channel, infeasible instance, covariance
//! not positive-definite).

mod commands;
mod files;
mod report;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use genie_mac_core::Error as CoreError;

/// Classified failure: usage errors exit 1, domain errors exit 2.
#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Domain(String),
}

impl AppError {
    fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Domain(_) => 2,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(msg) | AppError::Domain(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<CoreError> for AppError {
    fn from(err: CoreError) -> Self {
        match err {
            // Malformed requests and refusals that a flag or spec fixes.
            CoreError::IndexOutOfRange { .. }
            | CoreError::RepeatedIndex { .. }
            | CoreError::EmptySubset
            | CoreError::SubsetSizeTooLarge { .. }
            | CoreError::TooManyUsers { .. }
            | CoreError::EpsOutOfRange(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::NonSquare { .. }
            | CoreError::NonFinite { .. }
            | CoreError::EmptyChannel
            | CoreError::NonPositivePower(_)
            | CoreError::NonPositiveNoise(_) => AppError::Usage(err.to_string()),
            // Mathematical outcomes of well-formed inputs.
            CoreError::NotDegraded { .. }
            | CoreError::NotAscending { .. }
            | CoreError::SigmaNotPd
            | CoreError::SigmaNotSymmetric { .. }
            | CoreError::NotWhitened { .. } => AppError::Domain(err.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "genie-mac",
    about = "Sum-capacity bounds for K-user Gaussian interference channels",
    long_about = "Computes successive-interference-cancellation rates, closed-form sum \
capacity for degraded (rank-1) channels with a verifiable certificate, and \
numerically optimized genie-MAC outer bounds for general channels.\n\n\
All rates are in bits per real channel use (log base 2). The environment \
variable GENIE_MAC_THREADS caps internal parallelism.",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ToleranceArgs {
    /// Residual tolerance for factorization and certificate checks
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args, Debug, Clone)]
struct OptimizerArgs {
    /// Descent starts per subset ordering
    #[arg(long, default_value_t = 8)]
    starts: usize,
    /// Seed for randomized starts
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap per start
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Sum capacity of a degraded channel with certificate verification
    Sumcap {
        /// Channel file (JSON: {"H": [[...]], "P":, "N":} or {"a": [...], "b": [...], "P":, "N":})
        channel: PathBuf,
        #[command(flatten)]
        tolerance: ToleranceArgs,
    },
    /// Per-user successive-cancellation rates of a degraded channel
    Rates {
        channel: PathBuf,
        #[command(flatten)]
        tolerance: ToleranceArgs,
    },
    /// Build, verify, and export the bound certificate of a degraded channel
    Certificate {
        channel: PathBuf,
        /// Write the certificate (a valid `verify` instance file) here
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tolerance: ToleranceArgs,
    },
    /// Genie-MAC outer bounds via numerical minimization
    #[command(after_help = "CSV columns: subset (indices joined by '+'), ordering (decoding \
order joined by '-'), value_bits, converged (0/1, best ordering only), best (1 marks the \
per-subset minimum). Values carry 17 significant digits; rates are bits/channel use, log base 2.")]
    Bound {
        channel: PathBuf,
        /// Ordered subset "1,3,2", or "all", or "size=k"
        #[arg(long, default_value = "all")]
        subset: String,
        /// Emit CSV instead of the pretty table
        #[arg(long)]
        csv: bool,
        /// Enumerate subsets even for K > 8
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        optimizer: OptimizerArgs,
        #[command(flatten)]
        tolerance: ToleranceArgs,
    },
    /// Check a genie-MAC instance file against a channel; exit 0 iff feasible
    Verify {
        channel: PathBuf,
        /// Instance file (JSON: {"subset": [..], "G": [[..]], "Sigma": [[..]]?, "T": [[..]]})
        instance: PathBuf,
        #[command(flatten)]
        tolerance: ToleranceArgs,
    },
    /// Sample an ensemble and stream one CSV row per channel
    #[command(after_help = "CSV columns: index, kind, k, seed (per-row RNG seed), digest \
(SHA-256 prefix of the sampled gains), achievable_sum_bits, theorem2_bits, fstar_bits, \
gap_bits (fstar - theorem2). General channels leave the degraded-only columns empty. \
Output is deterministic given --seed; values carry 17 significant digits.")]
    Sweep {
        /// Users per sampled channel
        #[arg(long, value_name = "K")]
        users: usize,
        /// Number of channels to sample
        #[arg(long)]
        count: usize,
        /// Ensemble kind
        #[arg(long, value_parser = ["degraded", "general"], default_value = "degraded")]
        kind: String,
        /// Gains are sampled uniformly with this magnitude bound
        #[arg(long, default_value_t = 4.0)]
        gain_max: f64,
        #[command(flatten)]
        optimizer: OptimizerArgs,
        #[command(flatten)]
        tolerance: ToleranceArgs,
    },
}

fn main() {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let kind = err.kind();
            let _ = err.print();
            let code = match kind {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            std::process::exit(code);
        }
    };
    let outcome = match cli.command {
        Command::Sumcap { channel, tolerance } => commands::sumcap(&channel, tolerance.tol),
        Command::Rates { channel, tolerance } => commands::rates(&channel, tolerance.tol),
        Command::Certificate {
            channel,
            out,
            tolerance,
        } => commands::certificate(&channel, out.as_deref(), tolerance.tol),
        Command::Bound {
            channel,
            subset,
            csv,
            force,
            optimizer,
            tolerance,
        } => commands::bound(
            &channel,
            &subset,
            csv,
            force,
            optimizer_config(&optimizer, tolerance.tol),
        ),
        Command::Verify {
            channel,
            instance,
            tolerance,
        } => commands::verify(&channel, &instance, tolerance.tol),
        Command::Sweep {
            users,
            count,
            kind,
            gain_max,
            optimizer,
            tolerance,
        } => commands::sweep(
            users,
            count,
            &kind,
            gain_max,
            optimizer_config(&optimizer, tolerance.tol),
        ),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}

fn optimizer_config(args: &OptimizerArgs, tol: f64) -> genie_mac_core::OptimizerConfig {
    genie_mac_core::OptimizerConfig {
        starts: args.starts,
        seed: args.seed,
        max_iters: args.max_iters,
        tol,
        ..genie_mac_core::OptimizerConfig::default()
    }
}

/// Applies the GENIE_MAC_THREADS cap to the global worker pool. Results are
/// identical for any thread count; only wall time changes.
fn configure_threads() {
    if let Ok(value) = std::env::var("GENIE_MAC_THREADS") {
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring invalid GENIE_MAC_THREADS={value}"),
        }
    }
}
