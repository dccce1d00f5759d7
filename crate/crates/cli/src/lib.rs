//! Command implementations behind the `exaloglog` binary.

pub mod checkpoints;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use exaloglog::sim::{run_plan, EstimatorKind, SimPlan, DEFAULT_DIRECT_LIMIT};
use exaloglog::theory::{mvp_grid_argmin, MvpKind, TheoryConfig};
use exaloglog::tokens::TOKEN_MAGIC;
use exaloglog::{estimate_distinct, estimate_distinct_uncorrected, Params, Sketch, TokenSet};

use checkpoints::{parse_checkpoints, parse_count, parse_range};

#[derive(Debug, Parser)]
#[command(
    name = "exaloglog",
    version,
    about = "ExaLogLog sketches: error simulation, theory tables, file tools"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the relative bias and RMSE of a sketch estimator.
    SimulateError(SimulateError),
    /// Simulate the error of estimating from a set of hash tokens.
    TokenError(TokenError),
    /// Tabulate the memory-variance product over a (t, d) grid.
    MvpTable(MvpTable),
    /// Show parameters, fill and estimates of a serialized sketch or token set.
    SketchInfo(SketchInfo),
    /// Merge two serialized sketches.
    MergeFiles(MergeFiles),
    /// Reduce a serialized sketch to fewer indicator bits or registers.
    ReduceFile(ReduceFile),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    Ml,
    Martingale,
}

#[derive(Debug, Args)]
pub struct RunOptions {
    /// Number of independent runs
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    /// Comma-separated distinct counts, e.g. `1e4,1e5` or `ladder:0..6`
    #[arg(long, value_parser = parse_checkpoints)]
    pub checkpoints: std::vec::Vec<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination; standard output if omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateError {
    #[arg(long, default_value_t = 2)]
    pub t: u8,
    #[arg(long, default_value_t = 20)]
    pub d: u8,
    #[arg(long, default_value_t = 8)]
    pub p: u8,
    #[arg(long, value_enum, default_value_t = Estimator::Ml)]
    pub estimator: Estimator,
    /// Distinct count after which the waiting-time simulation takes over
    #[arg(long, value_parser = parse_count, default_value_t = DEFAULT_DIRECT_LIMIT)]
    pub direct_limit: u64,
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Debug, Args)]
pub struct TokenError {
    /// Token parameter, tokens take r + 6 bits
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=26))]
    pub r: u8,
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Debug, Args)]
pub struct MvpTable {
    #[arg(long, default_value = "0..3", value_parser = parse_range)]
    pub t_range: (u8, u8),
    #[arg(long, default_value = "0..32", value_parser = parse_range)]
    pub d_range: (u8, u8),
    #[arg(long, value_enum, default_value_t = Estimator::Ml)]
    pub kind: Estimator,
    /// Print only the grid minimum
    #[arg(long)]
    pub argmin: bool,
}

#[derive(Debug, Args)]
pub struct SketchInfo {
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct MergeFiles {
    pub first: PathBuf,
    pub second: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Reduce both inputs to their common parameters first
    #[arg(long)]
    pub auto_reduce: bool,
}

#[derive(Debug, Args)]
pub struct ReduceFile {
    pub input: PathBuf,
    #[arg(long)]
    pub d: u8,
    #[arg(long)]
    pub p: u8,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::SimulateError(args) => simulate_error(args, stdout),
        Command::TokenError(args) => token_error(args, stdout),
        Command::MvpTable(args) => mvp_table(args, stdout),
        Command::SketchInfo(args) => sketch_info(&args.file, stdout),
        Command::MergeFiles(args) => merge_files(args),
        Command::ReduceFile(args) => reduce_file(args),
    }
}

fn write_report(plan: &SimPlan, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let report = run_plan(plan)?;
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
        }
        None => report.write_csv(stdout)?,
    }
    Ok(())
}

fn simulate_error(args: SimulateError, stdout: &mut dyn Write) -> Result<()> {
    let params = Params::new(args.t, args.d, args.p)?;
    let kind = match args.estimator {
        Estimator::Ml => EstimatorKind::Ml,
        Estimator::Martingale => EstimatorKind::Martingale,
    };
    let plan = SimPlan::new(params, kind, args.run.checkpoints, args.run.runs)
        .with_seed(args.run.seed)
        .with_direct_limit(args.direct_limit);
    write_report(&plan, args.run.out.as_deref(), stdout)
}

fn token_error(args: TokenError, stdout: &mut dyn Write) -> Result<()> {
    let last = args.run.checkpoints.last().copied().unwrap_or(0);
    // sketch parameters do not affect token plans
    let plan = SimPlan::new(
        Params::with_precision(8)?,
        EstimatorKind::Tokens(args.r),
        args.run.checkpoints,
        args.run.runs,
    )
    .with_seed(args.run.seed)
    .with_direct_limit(last);
    write_report(&plan, args.run.out.as_deref(), stdout)
}

fn mvp_table(args: MvpTable, stdout: &mut dyn Write) -> Result<()> {
    let kind = match args.kind {
        Estimator::Ml => MvpKind::Ml,
        Estimator::Martingale => MvpKind::Martingale,
    };
    let (t_lo, t_hi) = args.t_range;
    let (d_lo, d_hi) = args.d_range;
    if t_hi > 3 {
        bail!("t must be at most 3");
    }
    if u32::from(d_hi) + u32::from(t_hi) > 58 {
        bail!("6 + t + d must not exceed 64");
    }
    if args.argmin {
        let (t, d, v) = mvp_grid_argmin(kind, t_lo..=t_hi, d_lo..=d_hi).expect("nonempty grid");
        writeln!(stdout, "t={t} d={d} mvp={v:.4}")?;
        return Ok(());
    }
    writeln!(stdout, "t,d,mvp")?;
    for t in t_lo..=t_hi {
        for d in d_lo..=d_hi {
            writeln!(stdout, "{t},{d},{:.6}", TheoryConfig::new(t, d).mvp(kind))?;
        }
    }
    Ok(())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_sketch(path: &Path) -> Result<Sketch> {
    Sketch::from_bytes(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn write_sketch(path: &Path, sketch: &Sketch) -> Result<()> {
    fs::write(path, sketch.to_bytes()).with_context(|| format!("writing {}", path.display()))
}

fn sketch_info(path: &Path, stdout: &mut dyn Write) -> Result<()> {
    let bytes = read(path)?;
    if bytes.first() == Some(&TOKEN_MAGIC) {
        let set =
            TokenSet::from_bytes(&bytes).with_context(|| format!("parsing {}", path.display()))?;
        writeln!(stdout, "kind: token set")?;
        writeln!(stdout, "r: {}", set.r())?;
        writeln!(stdout, "tokens: {}", set.len())?;
        writeln!(stdout, "estimate: {}", set.estimate())?;
        return Ok(());
    }
    let sketch =
        Sketch::from_bytes(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    let params = sketch.params();
    writeln!(stdout, "kind: sketch")?;
    writeln!(stdout, "params: {params}")?;
    writeln!(stdout, "registers: {}", sketch.num_registers())?;
    writeln!(stdout, "register bits: {}", params.register_bits())?;
    writeln!(stdout, "bytes: {}", bytes.len())?;
    writeln!(stdout, "nonzero registers: {}", sketch.nonzero_registers())?;
    writeln!(
        stdout,
        "saturated registers: {}",
        sketch.saturated_registers()
    )?;
    writeln!(stdout, "estimate: {}", estimate_distinct(&sketch))?;
    writeln!(
        stdout,
        "estimate (uncorrected): {}",
        estimate_distinct_uncorrected(&sketch)
    )?;
    Ok(())
}

fn merge_files(args: MergeFiles) -> Result<()> {
    let a = read_sketch(&args.first)?;
    let b = read_sketch(&args.second)?;
    let merged = if args.auto_reduce {
        a.merge_reduced(&b)?
    } else {
        a.merge(&b)?
    };
    write_sketch(&args.out, &merged)
}

fn reduce_file(args: ReduceFile) -> Result<()> {
    let sketch = read_sketch(&args.input)?;
    write_sketch(&args.out, &sketch.reduce(args.d, args.p)?)
}
