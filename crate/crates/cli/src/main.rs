//! `oracle-geom`: generate planted instances and run the solvers and
//! learners on them.
//!
//! Exit codes: 0 success, 2 assumption violated by the input, 3 contract,
//! dimension or schema error, 4 capacity, construction or internal
//! diagnostic (a run whose answer fails verification also exits 4).

mod harness;
mod instance;
mod run;
mod sweep;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use oracle_geom::terrain::parse_xyz;
use oracle_geom::tol::ENV_VAR;
use oracle_geom::{Error, Tolerances};

use instance::{generate, GenParams, InstanceFile, Kind, Layout};
use run::{run_one, Command, RunOptions, CSV_HEADER};
use sweep::{parse_sweep, run_sweep, summarize, SweepArgs};

/// Malformed input file, flag combination or parameter value.
#[derive(Debug)]
pub struct SchemaError(pub String);

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SchemaError {}

/// Process exit code for an error.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Assumption(_) | Error::Generation(_) => 2,
                Error::Contract(_) | Error::DimensionMismatch { .. } | Error::UnsupportedDimension(_) => 3,
                Error::Capacity { .. } | Error::Construction { .. } | Error::Diagnostic(_) => 4,
            };
        }
        if cause.is::<SchemaError>() || cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 3;
        }
    }
    4
}

#[derive(Parser)]
#[command(name = "oracle-geom", version, about = "Oracle-driven geometric learning")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a planted instance file.
    Gen(GenArgs),
    /// Run a solver or learner on an instance file, or on a generated sweep.
    Run(RunArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    /// Dimension (ulp).
    #[arg(long)]
    d: Option<usize>,
    /// Number of planted disks, triangles or terrain pieces.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    margin: Option<f64>,
    /// Terrain height tolerance.
    #[arg(long)]
    eps: Option<f64>,
    /// Plant an infeasible core (ulp).
    #[arg(long)]
    infeasible: bool,
    #[arg(long, value_enum)]
    layout: Option<Layout>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when unset.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(value_enum)]
    command: Command,
    /// Instance file (JSON), or an `.xyz` point file for simplify-terrain.
    instance: Option<PathBuf>,
    #[command(flatten)]
    opts: RunOptions,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Report file; stdout when unset.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one CSV row per run here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn gen(a: GenArgs) -> Result<i32> {
    let params = GenParams {
        n: a.n,
        d: a.d,
        k: a.k,
        feasible: (a.kind == Kind::Ulp).then_some(!a.infeasible),
        margin: a.margin,
        eps: a.eps,
        layout: a.layout,
    };
    if a.infeasible && a.kind != Kind::Ulp {
        return Err(SchemaError("--infeasible applies to ulp instances only".into()).into());
    }
    let file = generate(a.kind, &params, a.seed)?;
    emit(a.out.as_deref(), &file.to_json()?)?;
    Ok(0)
}

fn load(cmd: Command, path: &Path) -> Result<InstanceFile> {
    if path.extension().is_some_and(|e| e == "xyz") {
        if cmd != Command::SimplifyTerrain {
            return Err(SchemaError(format!("{} does not read .xyz files", cmd.name())).into());
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return InstanceFile::from_xyz(&parse_xyz(&text)?);
    }
    InstanceFile::load(path)
}

fn run(a: RunArgs) -> Result<i32> {
    if let Some(spec) = &a.sweep.sweep {
        if a.instance.is_some() {
            return Err(SchemaError("give either an instance file or --sweep, not both".into()).into());
        }
        let ns = parse_sweep(spec)?;
        let cells = run_sweep(a.command, &ns, &a.sweep, &a.opts);
        let summary = summarize(a.command, &ns, &a.sweep, &a.opts, &cells);
        emit(a.out.as_deref(), &(serde_json::to_string_pretty(&summary)? + "\n"))?;
        if let Some(csv) = &a.csv {
            let mut text = format!("{CSV_HEADER}\n");
            for r in cells.iter().filter_map(|c| c.report.as_ref()) {
                text.push_str(&r.csv_row());
                text.push('\n');
            }
            emit(Some(csv), &text)?;
        }
        if let Some(c) = cells.iter().find(|c| c.exit_code != 0) {
            eprintln!("error: n={} seed={}: {}", c.n, c.seed, c.error.as_deref().unwrap_or(""));
            return Ok(c.exit_code);
        }
        let unverified = cells.iter().filter_map(|c| c.report.as_ref()).filter(|r| !r.verified()).count();
        if unverified > 0 {
            eprintln!("error: {unverified} runs failed verification");
            return Ok(4);
        }
        return Ok(0);
    }
    let path = a.instance.as_deref().ok_or_else(|| SchemaError("an instance file or --sweep is required".into()))?;
    let file = load(a.command, path)?;
    let report = run_one(a.command, &file, &a.opts)?;
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    if let Some(csv) = &a.csv {
        emit(Some(csv), &format!("{CSV_HEADER}\n{}\n", report.csv_row()))?;
    }
    if !report.verified() {
        eprintln!("error: verification failed: {:?}", report.verification);
        return Ok(4);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    if let Ok(spec) = std::env::var(ENV_VAR) {
        if let Err(e) = Tolerances::parse(&spec) {
            eprintln!("error: {ENV_VAR}: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match cli.cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Run(a) => run(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
