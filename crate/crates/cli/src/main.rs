//! `sumlab`: run seeded 3SUM / k-LDT experiments and emit one record per run.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use sumlab::experiment::{fit_exponent, has_mismatch, mean_by_n, run, write_csv, write_json, Algo, Config};
use sumlab::instance::{from_json, Distribution};
use sumlab::{BlockSize, Scalar};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Instrumented 3SUM and k-LDT decision procedures.
#[derive(Debug, Parser)]
#[command(name = "sumlab", version)]
struct Args {
    /// brute, quad, gp, rfc, subq or kldt.
    #[arg(long)]
    algo: String,
    /// Instance sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "64")]
    n: Vec<usize>,
    /// Block size: an integer or `auto`.
    #[arg(long, default_value = "auto")]
    g: String,
    /// Arity of the k-LDT problem (odd, at least 3).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// k-LDT coefficients alpha_0..alpha_k, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alphas: Option<Vec<Scalar>>,
    /// uniform, planted, no-solution-parity or clustered.
    #[arg(long, default_value = "uniform")]
    dist: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Largest n cross-checked against an oracle.
    #[arg(long, default_value_t = sumlab::experiment::DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,
    /// Record wall-clock time (output is then no longer reproducible).
    #[arg(long)]
    timing: bool,
    /// Solve the instance in this JSON file instead of generating.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Print the fitted log-log slope of mean comparisons against n to stderr.
    #[arg(long)]
    fit: bool,
}

fn config(args: &Args) -> sumlab::Result<Config> {
    let algo: Algo = args.algo.parse()?;
    let mut cfg = Config::new(algo, args.n.clone());
    cfg.g = args.g.parse::<BlockSize>()?;
    cfg.k = args.k;
    cfg.alphas = args.alphas.clone();
    cfg.dist = args.dist.parse::<Distribution>()?;
    cfg.seed = args.seed;
    cfg.trials = args.trials;
    cfg.oracle_limit = args.oracle_limit;
    cfg.timing = args.timing;
    if let Some(path) = &args.input {
        let text = std::fs::read_to_string(path)
            .map_err(|e| sumlab::Error::Format(format!("{}: {e}", path.display())))?;
        cfg.input = Some(from_json(&text)?);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let records = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        },
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let written = match args.format {
        Format::Csv => write_csv(&records, sink),
        Format::Json => write_json(&records, sink),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if args.fit {
        for (n, mean, trials) in mean_by_n(&records) {
            eprintln!("n={n} trials={trials} mean_comparisons={mean:.1}");
        }
        match fit_exponent(&records) {
            Ok(slope) => eprintln!("slope={slope:.4}"),
            Err(e) => eprintln!("fit: {e}"),
        }
    }
    if has_mismatch(&records) {
        eprintln!("oracle mismatch");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
