//! Command-line driver: parses system spec files, runs the engine, writes reports.

pub mod literal;
pub mod report;
pub mod spec;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mrank::linalg::{snf, StoreMode};
use mrank::natext::{natural_extension_check, tower_mean_rank, TowerSpec};
use mrank::trajectory::EngineParams;

use report::{Format, Outcome, ReportFile, SnfOutput, Timing};
use spec::System;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Io(_) => 1,
            CliError::Invariant(_) => 2,
        }
    }
}

impl From<mrank::Error> for CliError {
    fn from(e: mrank::Error) -> Self {
        match e {
            mrank::Error::InvalidParameters(m) => CliError::Parse { line: 0, column: 0, message: m },
            other => CliError::Invariant(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mrank", version, about = "Exact mean rank and mean dimension of algebraic dynamical systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean rank of a matrix endomorphism, or mean dimension of a cellular automaton.
    Mrk(RunArgs),
    /// Compare the system, its eventual-kernel quotient and its colimit.
    Natext(RunArgs),
    /// Mean dimension of an inverse limit: supremum over the tower levels.
    Tower(RunArgs),
    /// Smith normal form of an integer matrix.
    Snf(SnfArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value = "json")]
    pub report: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Largest generating window `W`.
    #[arg(long)]
    pub window: Option<usize>,
    /// Double-check every rank along the exact path.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SnfArgs {
    /// Matrix literal such as `[[2,4],[6,8]]`, or a file containing one.
    pub matrix: String,
    #[command(flatten)]
    pub common: Common,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Mrk(a) | Command::Natext(a) | Command::Tower(a) => &a.common,
            Command::Snf(a) => &a.common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Mrk(_) => "mrk",
            Command::Natext(_) => "natext",
            Command::Tower(_) => "tower",
            Command::Snf(_) => "snf",
        }
    }
}

fn read(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn params(args: &RunArgs, file: &spec::SpecFile) -> Result<EngineParams, CliError> {
    let mut schedule = file.schedule.clone();
    if let Some(n) = args.max_n {
        schedule.max_n = n;
    }
    if let Some(w) = args.window {
        schedule.max_window = w;
    }
    let mut p = schedule.params();
    if args.verify {
        p.store_mode = StoreMode::Verified;
    }
    p.validate()?;
    Ok(p)
}

fn compute(command: &Command) -> Result<(serde_json::Value, Outcome), CliError> {
    match command {
        Command::Snf(a) => {
            let source = if a.matrix.trim_start().starts_with('[') { a.matrix.clone() } else { read(a.matrix.as_ref())? };
            let m = literal::parse_matrix(&source)?;
            let echo = serde_json::json!({ "matrix": m.to_rows().iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>() });
            Ok((echo, Outcome::Snf(SnfOutput::from(&snf(&m)))))
        }
        Command::Mrk(a) | Command::Natext(a) | Command::Tower(a) => {
            let file = spec::parse(&read(&a.spec)?)?;
            let p = params(a, &file)?;
            let outcome = match (command, &file.system) {
                (Command::Mrk(_), System::Single(s)) => Outcome::MeanRank(s.mean_rank(&p)?),
                (Command::Natext(_), System::Single(s)) => Outcome::Natext(natural_extension_check(s, &p)?),
                (Command::Tower(_), System::Tower(t)) => Outcome::Tower(tower_mean_rank(t, &p)?),
                (Command::Tower(_), System::Single(s)) => {
                    let t = TowerSpec::new(vec![s.clone()], vec![])?;
                    Outcome::Tower(tower_mean_rank(&t, &p)?)
                }
                (_, System::Tower(_)) => {
                    return Err(CliError::Parse { line: 1, column: 1, message: format!("`{}` needs a single system, not a tower", command.name()) })
                }
                _ => unreachable!(),
            };
            Ok((file.echo, outcome))
        }
    }
}

/// Runs one command and returns the report together with the exit code it calls for.
pub fn execute(cli: &Cli) -> Result<(ReportFile, i32), CliError> {
    let common = cli.command.common();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = common.workers {
        if k == 0 {
            return Err(CliError::Parse { line: 0, column: 0, message: "--workers must be at least 1".into() });
        }
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| CliError::Io(e.to_string()))?;
    let start = Instant::now();
    let (input, result) = pool.install(|| compute(&cli.command))?;
    let code = result.exit_code();
    let report = ReportFile {
        tool: "mrank".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cli.command.name().into(),
        input,
        result,
        timing: Timing { elapsed_ms: start.elapsed().as_secs_f64() * 1e3, workers: pool.current_num_threads() },
    };
    Ok((report, code))
}

/// Writes the report where requested.
pub fn emit(cli: &Cli, report: &ReportFile) -> Result<(), CliError> {
    let common = cli.command.common();
    let body = report::render(report, common.report);
    match &common.out {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}
