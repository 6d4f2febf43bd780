//! Command-line surface: compute a bounds table once, then certify or
//! evaluate streams of vectors read from standard input.

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::certify::certify;
use crate::error::{Error, Result};
use crate::gram::{GramConfig, DEFAULT_TRUNCATE_PLACES};
use crate::io::{digest_matches, load_bounds, load_model, parse_number, save_bounds};
use crate::linalg::Vector;
use crate::lipschitz::gen_all_bounds_with;
use crate::nn::argmax;
use crate::rational::Rational;
use crate::sqrt::{SqrtConfig, DEFAULT_ITERATE_PLACES, DEFAULT_SQRT_ITERATIONS};

#[derive(Debug, Parser)]
#[command(
    name = "lipcert",
    version,
    about = "Sound l2 robustness certification for ReLU networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute margin Lipschitz bounds for a model and write them to a file.
    Bounds(BoundsArgs),
    /// Certify output vectors read from stdin, one per line.
    Certify(CertifyArgs),
    /// Evaluate the model on input vectors read from stdin, one per line.
    Apply(ApplyArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub gram_iterations: usize,
    /// Heron convergence tolerance, an exact decimal or fraction.
    #[arg(long, default_value = "0.00000000001")]
    pub sqrt_err: String,
    #[arg(long, default_value_t = DEFAULT_SQRT_ITERATIONS)]
    pub sqrt_max_iters: u64,
    #[arg(long, default_value_t = DEFAULT_ITERATE_PLACES)]
    pub sqrt_places: u32,
    /// Decimal places Gram iterates are truncated to.
    #[arg(long, default_value_t = DEFAULT_TRUNCATE_PLACES)]
    pub truncate_places: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub bounds: PathBuf,
    #[arg(long)]
    pub epsilon: String,
    /// Warn if the bounds were computed for a different model.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long)]
    pub model: PathBuf,
}

fn parse_rational_arg(flag: &str, text: &str) -> Result<Rational> {
    text.trim().parse().map_err(|e| Error::Config(format!("--{flag}: {e}")))
}

/// Parse one comma-separated vector from a stdin line.
pub fn parse_vector(line: &str, line_no: usize) -> Result<Vector> {
    let values = line
        .split(',')
        .map(|field| {
            parse_number(field.trim()).map_err(|source| Error::ModelLiteral {
                path: None,
                line: line_no,
                column: source.position,
                source,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Vector::new(values)
}

fn data_lines(stdin: &mut dyn BufRead) -> impl Iterator<Item = (usize, std::io::Result<String>)> + '_ {
    stdin
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
}

fn io_error(source: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdio>"),
        source,
    }
}

fn run_bounds(args: &BoundsArgs, stdout: &mut dyn Write) -> Result<()> {
    let sqrt = SqrtConfig::new(
        parse_rational_arg("sqrt-err", &args.sqrt_err)?,
        args.sqrt_max_iters,
        args.sqrt_places,
    )?;
    let net = load_model(&args.model)?;
    let cfg = GramConfig {
        iterations: args.gram_iterations,
        truncate_places: args.truncate_places,
        sqrt,
    };
    let start = Instant::now();
    let bounds = gen_all_bounds_with(&net, &cfg);
    let elapsed = start.elapsed();
    save_bounds(&bounds, &args.out)?;
    writeln!(
        stdout,
        "wrote {} bounds for {} outputs to {} in {:.3}s",
        bounds.pairs().count(),
        bounds.dim(),
        args.out.display(),
        elapsed.as_secs_f64()
    )
    .map_err(io_error)
}

fn run_certify(
    args: &CertifyArgs,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let e = parse_rational_arg("epsilon", &args.epsilon)?;
    if e.is_negative() {
        return Err(Error::NegativeEpsilon(e.to_string()));
    }
    let bounds = load_bounds(&args.bounds)?;
    if let Some(model) = &args.model {
        let net = load_model(model)?;
        if !digest_matches(&bounds, &net) {
            writeln!(
                stderr,
                "warning: bounds in {} were not computed for {}",
                args.bounds.display(),
                model.display()
            )
            .map_err(io_error)?;
        }
    }
    for (line_no, line) in data_lines(stdin) {
        let v = parse_vector(&line.map_err(io_error)?, line_no)?;
        let result = certify(&v, &e, &bounds)?;
        match result.failing_index {
            None => writeln!(stdout, "CERTIFIED"),
            Some(i) => writeln!(stdout, "REJECTED {i}"),
        }
        .map_err(io_error)?;
    }
    Ok(())
}

fn run_apply(args: &ApplyArgs, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> Result<()> {
    let net = load_model(&args.model)?;
    for (line_no, line) in data_lines(stdin) {
        let v = parse_vector(&line.map_err(io_error)?, line_no)?;
        let out = net.apply(&v)?;
        let rendered: Vec<String> = out.iter().map(Rational::to_exact_string).collect();
        writeln!(stdout, "{} | argmax {}", rendered.join(" "), argmax(&out)).map_err(io_error)?;
    }
    Ok(())
}

/// Run with explicit argv and streams; returns the process exit code.
pub fn run<I, T>(argv: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Bounds(args) => run_bounds(args, stdout),
        Command::Certify(args) => run_certify(args, stdin, stdout, stderr),
        Command::Apply(args) => run_apply(args, stdin, stdout),
    };
    let _ = stdout.flush();
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
