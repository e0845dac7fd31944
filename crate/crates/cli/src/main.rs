//! `declab`: run decoupling-laboratory experiments from JSON spec files.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation failure, 3 numerical
//! refusal (e.g. a grid plan violating the Nyquist rule), 4 retry
//! exhaustion in a randomized selection.

mod runner;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use declab::error::Error;
use spec::ExperimentSpec;

#[derive(Parser)]
#[command(name = "declab", version, about = "decoupling laboratory experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment descriptor.
    #[arg(long)]
    spec: PathBuf,
    /// Override the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $DECLAB_OUT or the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rayon thread count (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output format: csv (CSV + JSON sidecar) or json (sidecar only).
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a frequency point set.
    Gen(RunArgs),
    /// Estimate an L^p mean / square-root-cancellation ratio.
    Norm(RunArgs),
    /// Measure a decoupling ratio over an ensemble partition.
    Decouple(RunArgs),
    /// Measure a recoupling ratio over coarse squares.
    Recouple(RunArgs),
    /// Partition counting, enumeration and averaged moments.
    Partition(RunArgs),
    /// Tube incidence counts and L^r norms.
    Tubes(RunArgs),
    /// Exponent fits across a scan of R.
    Scan(RunArgs),
    /// Randomized tight selection.
    Tight(RunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Norm(_) => "norm",
            Command::Decouple(_) => "decouple",
            Command::Recouple(_) => "recouple",
            Command::Partition(_) => "partition",
            Command::Tubes(_) => "tubes",
            Command::Scan(_) => "scan",
            Command::Tight(_) => "tight",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Gen(a)
            | Command::Norm(a)
            | Command::Decouple(a)
            | Command::Recouple(a)
            | Command::Partition(a)
            | Command::Tubes(a)
            | Command::Scan(a)
            | Command::Tight(a) => a,
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Validation(_) => 2,
        Error::Refusal(_) => 3,
        Error::RetryExhaustion(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.command.args();

    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }

    let text = match std::fs::read_to_string(&args.spec) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.spec.display());
            return ExitCode::from(1);
        }
    };
    let mut spec: ExperimentSpec = match serde_json::from_str(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: invalid spec: {e}");
            return ExitCode::from(2);
        }
    };
    if spec.kind_name() != cli.command.name() {
        eprintln!(
            "error: spec kind '{}' does not match subcommand '{}'",
            spec.kind_name(),
            cli.command.name()
        );
        return ExitCode::from(2);
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }

    let record = match runner::run(&spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };

    let out_dir = args
        .out
        .clone()
        .or_else(|| std::env::var_os("DECLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let stem = spec
        .output_path
        .clone()
        .unwrap_or_else(|| format!("{}-{}", spec.kind_name(), record.spec_hash));
    let json_only = args.format == "json";
    if args.format != "csv" && args.format != "json" {
        eprintln!("error: unknown format '{}'", args.format);
        return ExitCode::from(2);
    }
    match runner::write_outputs(&record, &out_dir, &stem, json_only) {
        Ok(paths) => {
            for p in &paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
