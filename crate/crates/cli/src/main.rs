#![allow(clippy::result_large_err)]

use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use posmap_cli::{run_batch, run_request, CliError, Command, Options, Response};
use serde_json::Value;

#[derive(Debug, Parser)]
#[command(
    name = "posmap",
    version,
    about = "Positivity, scaling and Kraus/co-Kraus decompositions of qubit maps"
)]
struct Cli {
    /// Numerical tolerance (the default depends on the command).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Iteration budget for scaling.
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,

    /// Seed for randomized searches and generators.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Regularization schedule, for example `1e-2,1e-4,1e-6`.
    #[arg(long, global = true, value_delimiter = ',')]
    eps: Option<Vec<f64>>,

    /// Read a JSON array of {command, input, options} requests from FILE
    /// (stdin when no file is given).
    #[arg(long, value_name = "FILE", num_args = 0..=1)]
    batch: Option<Option<PathBuf>>,

    /// Suppress the response document; only the exit code is reported.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Positivity, interiority and structural properties of a map.
    Check { input: Option<PathBuf> },
    /// Scale an interior positive map to bistochastic form.
    Scale { input: Option<PathBuf> },
    /// Kraus/co-Kraus decomposition with a verified residual.
    Decompose { input: Option<PathBuf> },
    /// Decide a one-constraint quadratic implication or a pencil problem.
    Slemma { input: Option<PathBuf> },
    /// Classify a Lorentz-cone preserving map as extreme or not.
    Extreme { input: Option<PathBuf> },
    /// Partial-transpose separability verdict for a two-qubit state.
    Ppt { input: Option<PathBuf> },
    /// Seeded random map of a given family.
    Random { input: Option<PathBuf> },
    /// Re-check a certificate produced by another command.
    Verify { input: Option<PathBuf> },
}

impl Sub {
    fn split(self) -> (Command, Option<PathBuf>) {
        match self {
            Sub::Check { input } => (Command::Check, input),
            Sub::Scale { input } => (Command::Scale, input),
            Sub::Decompose { input } => (Command::Decompose, input),
            Sub::Slemma { input } => (Command::Slemma, input),
            Sub::Extreme { input } => (Command::Extreme, input),
            Sub::Ppt { input } => (Command::Ppt, input),
            Sub::Random { input } => (Command::Random, input),
            Sub::Verify { input } => (Command::Verify, input),
        }
    }
}

fn read_document(path: Option<&PathBuf>) -> Result<Value, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| {
            CliError::invalid(p.display().to_string(), format!("cannot read file: {e}"))
        })?,
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::invalid("stdin", e.to_string()))?;
            s
        }
    };
    serde_json::from_str(&text).map_err(|e| {
        CliError::invalid(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

fn parse_failure(command: Option<Command>, e: &CliError) -> Response {
    Response {
        exit_code: e.exit_code,
        body: serde_json::json!({
            "version": posmap_cli::VERSION,
            "command": command.map(Command::name),
            "status": e.status,
            "error": e.to_json(),
            "certificate": Value::Null,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options {
        tol: cli.tol,
        max_iter: cli.max_iter,
        seed: cli.seed,
        eps_schedule: cli.eps.clone(),
    };
    let response = if let Some(batch_file) = &cli.batch {
        if cli.command.is_some() {
            eprintln!("error: --batch cannot be combined with a subcommand");
            return ExitCode::from(posmap_cli::EXIT_INVALID as u8);
        }
        match read_document(batch_file.as_ref()) {
            Ok(doc) => match opts.validate() {
                Ok(()) => run_batch(&doc, &opts),
                Err(e) => parse_failure(None, &e),
            },
            Err(e) => parse_failure(None, &e),
        }
    } else {
        let Some(sub) = cli.command else {
            eprintln!("error: a subcommand or --batch is required (see --help)");
            return ExitCode::from(posmap_cli::EXIT_INVALID as u8);
        };
        let (command, path) = sub.split();
        match read_document(path.as_ref()) {
            Ok(doc) => run_request(command, &doc, &opts),
            Err(e) => parse_failure(Some(command), &e),
        }
    };
    if !cli.quiet {
        let mut out = io::stdout().lock();
        let _ = writeln!(out, "{}", response.to_json_string());
    }
    ExitCode::from(response.exit_code as u8)
}
