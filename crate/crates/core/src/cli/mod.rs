//! Command-line front end: `run` fits, tests and bootstraps a CSV data set
//! and prints a report; `group` turns per-cell records into long format.
//!
//! Exit codes: 0 success, 2 input error, 3 non-convergence (`--strict`, or
//! every bootstrap replicate failing), 1 for output errors.

pub mod io;
pub mod report;
mod run;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bootstrap::write_replicate_values;
use crate::error::{Error, Result};

pub use report::{render_text, Report};
pub use run::{
    build_report, BootstrapArg, DirectionArg, FormatArg, GenerationArg, RunArgs, ScenarioArg,
    Sigma2Arg, SolverArg, StatisticArg,
};

#[derive(Debug, Parser)]
#[command(name = "monotone-lrt", version, about = "Tests for a monotone trend in normal group means")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit all scenarios, compute the test statistic and bootstrap p-values.
    Run(RunArgs),
    /// Group `cell,count,value` records into `level,value` long format.
    Group(GroupArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GroupArgs {
    /// CSV with header `cell,count,value`; `-` for stdin.
    pub input: PathBuf,

    /// Merge every count above this value into it.
    #[arg(long)]
    pub cap: Option<u64>,

    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => run_command(a),
        Command::Group(a) => group_command(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::Malformed { .. }
        | Error::DegenerateVariance { .. }
        | Error::Unsupported(_) => 2,
        Error::NonConvergence(_) => 3,
        Error::Io(_) => 1,
    }
}

fn run_command(args: &RunArgs) -> Result<i32> {
    let data = io::open_input(&args.input)
        .and_then(io::read_input)
        .map_err(input_error)?;
    let (report, dumps) = run::build(args, &data)?;
    let text = match args.format {
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        FormatArg::Text => render_text(&report),
    };
    write_output(args.output.as_deref(), text.as_bytes())?;
    if let Some(path) = &args.dump_replicates {
        let both = dumps.parametric.is_some() && dumps.nonparametric.is_some();
        for (tag, values) in [("parametric", &dumps.parametric), ("nonparametric", &dumps.nonparametric)] {
            if let Some(v) = values {
                let target = if both { tagged(path, tag) } else { path.clone() };
                let f = File::create(&target).map_err(|e| Error::Io(format!("{}: {e}", target.display())))?;
                write_replicate_values(BufWriter::new(f), v)?;
            }
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if args.strict && !report.converged { 3 } else { 0 })
}

fn group_command(args: &GroupArgs) -> Result<i32> {
    let cells = io::open_input(&args.input)
        .and_then(io::read_cells)
        .map_err(input_error)?;
    let rows = io::group_cells(&cells, args.cap);
    let mut buf = Vec::new();
    io::write_long(&mut buf, &rows)?;
    write_output(args.output.as_deref(), &buf)?;
    Ok(0)
}

/// Unreadable input files are input errors, not output errors.
fn input_error(e: Error) -> Error {
    match e {
        Error::Io(m) => Error::InvalidInput(m),
        other => other,
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// `out.txt` → `out.parametric.txt`.
fn tagged(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}
